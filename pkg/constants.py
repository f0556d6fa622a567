"""
Central constants for meetsense
Defaults, bounds, enums and file names shared by the pipeline, the models and the CLI
"""

from enum import Enum
from typing import Dict, List


# ════════════════════════════════════════════════════════════════
# AUDIO FRONT END
# ════════════════════════════════════════════════════════════════

DEFAULT_SAMPLE_RATE_HZ = 44100
DEFAULT_BAND_LOW_HZ = 300.0  # telephony band
DEFAULT_BAND_HIGH_HZ = 3400.0
DEFAULT_FILTER_ORDER = 4
DEFAULT_MAX_SHIFT_S = 30.0  # drift search window (±)
DEFAULT_MIN_OVERLAP_S = 1.0
DEFAULT_SEGMENT_LEN_S = 1.0
DEFAULT_CEPSTRUM_FLOOR_DB = 20.0  # log-spectrum floor below the segment peak
PCM_SUBTYPE = "PCM_16"


class CepstralPart(str, Enum):
    """Which half of the complex cepstrum enters the acoustic similarity"""

    EVEN = "even"
    COMPLEX = "complex"


# ════════════════════════════════════════════════════════════════
# PROXIMITY
# ════════════════════════════════════════════════════════════════

RSSI_CUTOFF_DBM = -80.0  # weaker readings are dropped at ingest
DEFAULT_TIME_BUCKET_S = 60.0
DEFAULT_MATCH_TOLERANCE_S = 30.0
DEFAULT_DISTANCE_CAP_DB = 30.0


# ════════════════════════════════════════════════════════════════
# FEATURE CONSTRUCTION
# ════════════════════════════════════════════════════════════════

DEFAULT_SIGNIFICANCE_ALPHA = 0.05
MIN_SIZE_FOR_OUTLIER_RULE = 4  # singleton cluster is noise from this size on


class SeparationTest(str, Enum):
    """Two-sample tests available for the k-means cluster split"""

    WELCH = "welch"
    MANN_WHITNEY = "mannwhitney"


# ════════════════════════════════════════════════════════════════
# COMMUNITY DETECTION
# ════════════════════════════════════════════════════════════════


class CommunityAlgorithm(str, Enum):
    """Supported weighted community detection algorithms"""

    WALKTRAP = "walktrap"
    LOUVAIN = "louvain"


DEFAULT_WALK_LENGTH = 4
EXHAUSTIVE_MAX_NODES = 10
MODULARITY_TIE_TOLERANCE = 1e-12


# ════════════════════════════════════════════════════════════════
# DETECTOR
# ════════════════════════════════════════════════════════════════

DEFAULT_DELTA_P1 = 0.30
DEFAULT_DELTA_P2 = 0.10
DEFAULT_DELTA_ALPHA = 0.10
DEFAULT_DELTA_PAIR = 0.30
DEFAULT_SINGLE_GROUP_FLOOR = 0.20
DEFAULT_COHESION_TOLERANCE = 0.05  # weaker partitions collapse to one community
DEFAULT_WINDOW_T_S = 900.0  # T >= 15 min
DEFAULT_WEIGHT_GRID: List[float] = [round(0.1 * k, 1) for k in range(11)]


class DecisionPath(str, Enum):
    """Which detector branch produced the groups"""

    PROXIMITY_AUDIO = "proximity+audio"
    WEIGHTED_COMBINED = "weighted-combined"
    AUDIO_ONLY = "audio-only"
    REJECTED = "rejected"


class Branch(str, Enum):
    """Scenario labels attached to each detector outcome"""

    PROXIMITY_DOMINATING = "Proximity Dominating"
    PROXIMITY_AUDIO_INFLUENCE = "Proximity & Audio Influence"
    PROXIMITY_INFLUENCE_AUDIO_INSIGNIFICANCE = "Proximity Influence & Audio Insignificance"
    PROXIMITY_CONFUSED_AUDIO_INFLUENCE = "Proximity Confused & Audio Influence"
    PROXIMITY_CONFUSED_AUDIO_INSIGNIFICANCE = "Proximity Confused & Audio Insignificance"
    PROXIMITY_INSIGNIFICANCE = "Proximity Insignificance"
    AUDIO_INFLUENCE = "Audio Influence"
    AUDIO_INSIGNIFICANCE = "Audio Insignificance"
    BASELINE = "Baseline"


# ════════════════════════════════════════════════════════════════
# METHODS & BASELINES
# ════════════════════════════════════════════════════════════════


class Method(str, Enum):
    """Group detection methods compared in the results table"""

    MEETSENSE = "meetsense"
    NEXT2ME = "next2me"
    AUDIOMATCH = "audiomatch"


METHOD_LABELS: Dict[str, str] = {
    Method.MEETSENSE.value: "MeetSense",
    Method.NEXT2ME.value: "Next2Me",
    Method.AUDIOMATCH.value: "AudioMatch",
}

DEFAULT_TOP_N_FREQUENCIES = 6
DEFAULT_FINGERPRINT_WINDOW_S = 0.064  # Hamming window, 50% overlap
DEFAULT_FINGERPRINT_OVERLAP = 0.5
FINGERPRINT_BITS = 16  # outer ring of a 5x5 neighbourhood


# ════════════════════════════════════════════════════════════════
# SIMULATOR
# ════════════════════════════════════════════════════════════════

SPEED_OF_SOUND_M_S = 343.0
MIN_PROPAGATION_DISTANCE_M = 0.5
VOICE_HARMONICS = 8
VOICE_F0_RANGE_HZ = (100.0, 250.0)
SYLLABLE_RATE_HZ = 4.0
SYLLABLE_DURATION_S = (0.10, 0.25)
SYLLABLE_AMPLITUDE = (0.6, 1.0)
DEFAULT_TURN_S = 10.0
OUTPUT_PEAK = 0.9  # loudest sample across all traces before 16-bit quantization
PCM_FULL_SCALE = 32767
DEFAULT_SCAN_INTERVAL_S = 60.0
DEFAULT_RSSI_SIGMA_DB = 2.0
DEFAULT_TX_POWER_DBM = -30.0  # RSSI at the 1 m reference distance
DEFAULT_PATH_LOSS_EXPONENT = 3.0
DEFAULT_SIM_SEED = 7
MOBILITY_RATE_HZ = 1.0


# ════════════════════════════════════════════════════════════════
# EVALUATION
# ════════════════════════════════════════════════════════════════

DEFAULT_SNR_GRID_DB: List[float] = [20.0, 15.0, 10.0, 5.0, 0.0]


class Assignment(str, Enum):
    """Truth/detected group pairing for the averaged F1"""

    BEST = "best"
    OPTIMAL = "optimal"


# ════════════════════════════════════════════════════════════════
# DATASET LAYOUT & FORMATS
# ════════════════════════════════════════════════════════════════

AUDIO_DIR = "audio"
AUDIO_INDEX_FILE = "index.json"
SCANS_FILE = "scans.csv"
TRUTH_FILE = "truth.json"
SCENARIO_FILE = "scenario.json"
MANIFEST_FILE = "manifest.json"
RESULT_FILE = "result.json"
COMPARE_FILE = "compare.csv"
SWEEP_FILE = "sweep.csv"
FEATURES_FILE = "features.csv"
ACOUSTIC_GRAPH_FILE = "acoustic_graph.csv"
PROXIMITY_GRAPH_FILE = "proximity_graph.csv"
PARTITION_FILE = "partition.json"

SCAN_CSV_HEADER = ["subject_id", "timestamp_s", "bssid", "rssi_dbm"]
PAIR_SERIES_CSV_HEADER = ["subject_i", "subject_j", "segment_index", "value"]
REFINED_CSV_HEADER = [
    "subject_i",
    "subject_j",
    "kind",
    "mean_value",
    "used_count",
    "total_count",
    "single_cluster",
]
EDGE_CSV_HEADER = ["node_i", "node_j", "weight"]
COMPARE_CSV_HEADER = ["scenario", "method", "f1", "modularity", "decision_path"]
SWEEP_CSV_HEADER = ["snr_db", "method", "f1", "same_group_mean", "cross_group_mean"]

FLOAT_FORMAT = "{:.4f}"  # fixed formatting keeps CSV output byte-stable
