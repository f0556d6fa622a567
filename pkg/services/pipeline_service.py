"""
Pipeline Service
Runs the CLI commands: config resolution, dataset generation, detection,
method comparison, sweeps and reports, each with a replayable run manifest
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from communities import write_edge_csv, write_partition_json
from config import settings
from constants import (
    ACOUSTIC_GRAPH_FILE,
    COMPARE_FILE,
    FEATURES_FILE,
    MANIFEST_FILE,
    PARTITION_FILE,
    PROXIMITY_GRAPH_FILE,
    RESULT_FILE,
    SWEEP_FILE,
    Method,
)
from detector import detect_from_inputs, extract_features, feature_graph, find_communities
from errors import DatasetError
from evaluation import (
    benchmark,
    compare,
    modularity_trace,
    noise_sweep,
    run_method,
    separation_report,
    weight_sweep_curve,
)
from models import (
    AnalysisInputs,
    BenchmarkRow,
    EvalReport,
    GroupResult,
    PipelineConfig,
    RunManifest,
    Scenario,
    SeparationStats,
    SweepPoint,
)
from proximity import load_scans_csv
from sim import ground_truth, library_scenario, load_scenario, scans_by_subject, synth_audio, synth_scans, with_seed

from .dataset_service import (
    Dataset,
    file_hashes,
    load_dataset,
    load_recordings,
    write_dataset,
    write_pair_series_csv,
    write_refined_csv,
)
from .export_service import (
    create_excel_export,
    create_pdf_export,
    plot_modularity_vs_f1,
    plot_noise_sweep,
    plot_separation,
    plot_weight_sweep,
    write_benchmark_csv,
    write_compare_csv,
    write_merge_trace_csv,
    write_separation_csv,
    write_sweep_csv,
)

logger = logging.getLogger(__name__)


# ════════════════════════════════════════════════════════════════
# CONFIG, SEED & MANIFEST
# ════════════════════════════════════════════════════════════════


def resolve_config(path: Optional[Path] = None) -> PipelineConfig:
    """
    Pipeline config from an explicit path, else from MEETSENSE_CONFIG, else
    the defaults.
    """
    path = path or settings.get_config_path()
    if path is None:
        return PipelineConfig()
    logger.info(f"Loading pipeline config from {path}")
    return PipelineConfig.load(Path(path))


def resolve_seed(seed: Optional[int] = None) -> Optional[int]:
    return seed if seed is not None else settings.get_default_seed()


def seeded(config: PipelineConfig, seed: Optional[int]) -> PipelineConfig:
    """Config with the Louvain random state taken from the run seed"""
    if seed is None:
        return config
    return config.model_copy(update={"community": config.community.model_copy(update={"seed": seed})})


def build_manifest(
    command: str,
    config: PipelineConfig,
    input_hashes: Dict[str, str],
    seed: Optional[int] = None,
) -> RunManifest:
    return RunManifest(
        command=command,
        config=config.model_dump(mode="json"),
        input_hashes=dict(sorted(input_hashes.items())),
        seed=seed,
        tool_version=settings.VERSION,
    )


def replay(manifest_path: Path) -> Tuple[PipelineConfig, Optional[int]]:
    """Config and seed of a prior run"""
    manifest = RunManifest.load(manifest_path)
    logger.info(f"Replaying {manifest.command} run from {manifest_path} (seed {manifest.seed})")
    return PipelineConfig.model_validate(manifest.config), manifest.seed


def _prepare_out(out_dir: Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _plot_path(out_dir: Path, stem: str) -> Path:
    return out_dir / f"{stem}.{settings.PLOT_FORMAT}"


def _dataset_hashes(dataset: Dataset) -> Dict[str, str]:
    """Hashes of the dataset's input files, outputs of earlier runs excluded"""
    outputs = {
        MANIFEST_FILE, RESULT_FILE, COMPARE_FILE, SWEEP_FILE, FEATURES_FILE,
        ACOUSTIC_GRAPH_FILE, PROXIMITY_GRAPH_FILE, PARTITION_FILE,
    }
    hashes = {path: digest for path, digest in file_hashes(dataset.root).items() if path.split("/")[-1] not in outputs}
    if dataset.scans_path is not None:
        hashes[dataset.scans_path.name] = hashlib.sha256(dataset.scans_path.read_bytes()).hexdigest()
    return hashes


def _inputs(dataset: Dataset, config: PipelineConfig) -> AnalysisInputs:
    return extract_features(dataset.traces, dataset.scans or None, config)


# ════════════════════════════════════════════════════════════════
# GEN
# ════════════════════════════════════════════════════════════════


def scenario_from_source(source: Union[str, Path], seed: Optional[int] = None) -> Scenario:
    """A scenario from a JSON file path or a library name"""
    path = Path(source)
    if path.suffix == ".json" or path.exists():
        scenario = load_scenario(path)
        return with_seed(scenario, seed) if seed is not None else scenario
    return library_scenario(str(source), seed)


def run_gen(source: Union[str, Path], out_dir: Path, seed: Optional[int] = None) -> RunManifest:
    """
    Render a scenario into a dataset directory.

    Raises:
        ParameterError: Unknown library name
        ScenarioValidationError: Inconsistent scenario file
        OSError: Unwritable output directory
    """
    seed = resolve_seed(seed)
    scenario = scenario_from_source(source, seed)
    traces = synth_audio(scenario)
    scans = scans_by_subject(synth_scans(scenario)) if scenario.access_points else None
    hashes = write_dataset(out_dir, traces, scans, ground_truth(scenario), scenario)
    manifest = build_manifest("gen", PipelineConfig(), hashes, scenario.seed)
    manifest.dump(Path(out_dir) / MANIFEST_FILE)
    logger.info(f"Generated scenario {scenario.name} (seed {scenario.seed}) into {out_dir}")
    return manifest


# ════════════════════════════════════════════════════════════════
# DETECT & FEATURES
# ════════════════════════════════════════════════════════════════


def resolve_dataset(
    dataset_dir: Optional[Path] = None,
    audio_dir: Optional[Path] = None,
    scans_path: Optional[Path] = None,
) -> Dataset:
    """
    The dataset a detection runs on: a dataset directory, or an audio
    directory with an optional scan file. A scan file given next to a dataset
    directory replaces the dataset's own scans.

    Raises:
        DatasetError: Neither or both of dataset_dir and audio_dir given
    """
    if (dataset_dir is None) == (audio_dir is None):
        raise DatasetError("give either a dataset directory or --audio-dir")
    if audio_dir is not None:
        return load_recordings(audio_dir, scans_path)
    dataset = load_dataset(dataset_dir)
    if scans_path is None:
        return dataset
    scans_path = Path(scans_path)
    return dataset.model_copy(update={"scans": load_scans_csv(scans_path), "scans_path": scans_path})


def run_detect(
    dataset: Union[Path, Dataset],
    config: PipelineConfig,
    out_dir: Path,
    seed: Optional[int] = None,
    method: Method = Method.MEETSENSE,
) -> GroupResult:
    """Detect groups in a dataset and write result.json and its manifest"""
    seed = resolve_seed(seed)
    config = seeded(config, seed)
    if not isinstance(dataset, Dataset):
        dataset = load_dataset(dataset)
    inputs = _inputs(dataset, config)
    result, _ = run_method(method, inputs, config)

    out_dir = _prepare_out(out_dir)
    (out_dir / RESULT_FILE).write_text(
        json.dumps(result.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if result.weight_sweep:
        plot_weight_sweep(weight_sweep_curve(result), _plot_path(out_dir, "weight_sweep"))
    build_manifest("detect", config, _dataset_hashes(dataset), seed).dump(out_dir / MANIFEST_FILE)
    return result


def run_features(dataset_dir: Path, config: PipelineConfig, out_dir: Path) -> AnalysisInputs:
    """
    Refined features, raw acoustic series, the walktrap merge trace, the
    feature graphs as edge lists and the communities of the acoustic graph
    """
    dataset = load_dataset(dataset_dir)
    inputs = _inputs(dataset, config)
    out_dir = _prepare_out(out_dir)
    write_refined_csv({"acoustic": inputs.acoustic, "proximity": inputs.proximity}, out_dir / FEATURES_FILE)
    write_pair_series_csv(inputs.acoustic_series, out_dir / "acoustic_series.csv")
    write_merge_trace_csv(modularity_trace(inputs, config), out_dir / "merge_trace.csv")
    acoustic = feature_graph(inputs, "acoustic")
    write_edge_csv(acoustic, out_dir / ACOUSTIC_GRAPH_FILE)
    if len(inputs.scanning) >= 2:
        write_edge_csv(feature_graph(inputs, "proximity"), out_dir / PROXIMITY_GRAPH_FILE)
    write_partition_json(find_communities(acoustic, config), out_dir / PARTITION_FILE)
    build_manifest("features", config, _dataset_hashes(dataset)).dump(out_dir / MANIFEST_FILE)
    return inputs


# ════════════════════════════════════════════════════════════════
# COMPARE & EVAL
# ════════════════════════════════════════════════════════════════


def _require_truth(dataset: Dataset) -> None:
    if dataset.truth is None:
        raise DatasetError(f"dataset {dataset.root} has no ground truth")


def run_compare(
    dataset_dirs: Sequence[Path],
    config: PipelineConfig,
    out_dir: Path,
    seed: Optional[int] = None,
    methods: Sequence[Method] = tuple(Method),
    xlsx: bool = False,
    pdf: bool = False,
) -> EvalReport:
    """
    Every method on every dataset, written as compare.csv (and optionally a
    workbook and a PDF report).

    Raises:
        DatasetError: A dataset lacks ground truth
    """
    seed = resolve_seed(seed)
    config = seeded(config, seed)
    report = EvalReport()
    hashes: Dict[str, str] = {}
    for dataset_dir in sorted(Path(d) for d in dataset_dirs):
        dataset = load_dataset(dataset_dir)
        _require_truth(dataset)
        inputs = _inputs(dataset, config)
        report.rows.extend(compare(inputs, dataset.truth, methods, config, dataset.name))
        hashes.update({f"{dataset.name}/{k}": v for k, v in _dataset_hashes(dataset).items()})

    out_dir = _prepare_out(out_dir)
    write_compare_csv(report, out_dir / COMPARE_FILE)
    manifest = build_manifest("compare", config, hashes, seed)
    manifest.dump(out_dir / MANIFEST_FILE)
    if xlsx:
        (out_dir / "compare.xlsx").write_bytes(create_excel_export(report))
    if pdf:
        (out_dir / "report.pdf").write_bytes(create_pdf_export(report, manifest))
    return report


def run_eval(
    scenario_names: Sequence[str],
    config: PipelineConfig,
    out_dir: Path,
    seed: Optional[int] = None,
    methods: Sequence[Method] = tuple(Method),
) -> EvalReport:
    """
    Render library scenarios in memory and compare every method on them;
    writes compare.csv and the modularity-vs-F1 scatter.
    """
    seed = resolve_seed(seed)
    config = seeded(config, seed)
    report = EvalReport()
    for name in sorted(scenario_names):
        scenario = library_scenario(name, seed)
        scans = scans_by_subject(synth_scans(scenario)) if scenario.access_points else None
        inputs = extract_features(synth_audio(scenario), scans, config)
        report.rows.extend(compare(inputs, ground_truth(scenario), methods, config, scenario.name))

    out_dir = _prepare_out(out_dir)
    write_compare_csv(report, out_dir / COMPARE_FILE)
    plot_modularity_vs_f1(report.sorted_rows(), _plot_path(out_dir, "modularity_vs_f1"))
    build_manifest("eval", config, {}, seed).dump(out_dir / MANIFEST_FILE)
    return report


# ════════════════════════════════════════════════════════════════
# SWEEP, SEPARATION & BENCHMARK
# ════════════════════════════════════════════════════════════════


def run_sweep(
    scenario_name: str,
    config: PipelineConfig,
    out_dir: Path,
    seed: Optional[int] = None,
    snr_grid: Optional[Sequence[float]] = None,
    methods: Sequence[Method] = tuple(Method),
    xlsx: bool = False,
) -> List[SweepPoint]:
    """Noise sweep of one library scenario; writes sweep.csv, its plot and optionally sweep.xlsx"""
    seed = resolve_seed(seed)
    config = seeded(config, seed)
    grid = list(snr_grid) if snr_grid else list(config.evaluation.snr_grid_db)
    points = noise_sweep(library_scenario(scenario_name, seed), grid, methods, config)

    out_dir = _prepare_out(out_dir)
    write_sweep_csv(points, out_dir / SWEEP_FILE)
    plot_noise_sweep(points, _plot_path(out_dir, "noise_sweep"))
    build_manifest("sweep", config, {}, seed).dump(out_dir / MANIFEST_FILE)
    if xlsx:
        (out_dir / "sweep.xlsx").write_bytes(create_excel_export(EvalReport(), sweep=points))
    return points


def run_separation(
    dataset_dir: Path,
    config: PipelineConfig,
    out_dir: Path,
    methods: Sequence[Method] = tuple(Method),
) -> List[SeparationStats]:
    """Same- vs cross-group similarity distributions of each method"""
    dataset = load_dataset(dataset_dir)
    _require_truth(dataset)
    inputs = _inputs(dataset, config)
    similarities = {method.value: run_method(method, inputs, config)[1] for method in methods}
    stats = separation_report(similarities, dataset.truth)

    out_dir = _prepare_out(out_dir)
    write_separation_csv(stats, out_dir / "separation.csv")
    plot_separation(stats, _plot_path(out_dir, "separation"))
    return stats


def run_bench(
    dataset_dir: Path,
    config: PipelineConfig,
    out_dir: Path,
    repeats: int = 3,
    methods: Sequence[Method] = tuple(Method),
) -> List[BenchmarkRow]:
    dataset = load_dataset(dataset_dir)
    rows = benchmark(dataset.traces, methods, repeats, config)
    out_dir = _prepare_out(out_dir)
    write_benchmark_csv(rows, out_dir / "benchmark.csv")
    (out_dir / "benchmark.xlsx").write_bytes(create_excel_export(EvalReport(), bench=rows))
    return rows


def detect_dataset(dataset_dir: Path, config: Optional[PipelineConfig] = None) -> GroupResult:
    """MeetSense detection of a dataset without writing anything"""
    config = config or PipelineConfig()
    return detect_from_inputs(_inputs(load_dataset(dataset_dir), config), config)
