"""
Service layer
Separates dataset I/O, run orchestration and result export from the CLI
"""

from .dataset_service import (
    Dataset,
    write_dataset,
    load_dataset,
    load_traces,
    load_recordings,
    load_truth,
    file_hashes,
    write_pair_series_csv,
    write_refined_csv,
)

from .export_service import (
    write_compare_csv,
    write_sweep_csv,
    write_separation_csv,
    write_benchmark_csv,
    write_merge_trace_csv,
    get_report_statistics,
    create_excel_export,
    create_pdf_export,
    plot_noise_sweep,
    plot_separation,
    plot_weight_sweep,
    plot_modularity_vs_f1,
)

from .pipeline_service import (
    resolve_config,
    resolve_seed,
    build_manifest,
    replay,
    scenario_from_source,
    resolve_dataset,
    run_gen,
    run_detect,
    run_features,
    run_compare,
    run_eval,
    run_sweep,
    run_separation,
    run_bench,
    detect_dataset,
)

__all__ = [
    # Dataset Service
    "Dataset",
    "write_dataset",
    "load_dataset",
    "load_traces",
    "load_recordings",
    "load_truth",
    "file_hashes",
    "write_pair_series_csv",
    "write_refined_csv",
    # Export Service
    "write_compare_csv",
    "write_sweep_csv",
    "write_separation_csv",
    "write_benchmark_csv",
    "write_merge_trace_csv",
    "get_report_statistics",
    "create_excel_export",
    "create_pdf_export",
    "plot_noise_sweep",
    "plot_separation",
    "plot_weight_sweep",
    "plot_modularity_vs_f1",
    # Pipeline Service
    "resolve_config",
    "resolve_seed",
    "build_manifest",
    "replay",
    "scenario_from_source",
    "resolve_dataset",
    "run_gen",
    "run_detect",
    "run_features",
    "run_compare",
    "run_eval",
    "run_sweep",
    "run_separation",
    "run_bench",
    "detect_dataset",
]
