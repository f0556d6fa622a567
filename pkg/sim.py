"""
Scenario simulator
Voiced audio with propagation delay, 1/d attenuation, device gain, clock
offset and ambient noise; log-distance RSSI scans; ground-truth groups
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from constants import (
    DEFAULT_TURN_S,
    MIN_PROPAGATION_DISTANCE_M,
    MOBILITY_RATE_HZ,
    OUTPUT_PEAK,
    PCM_FULL_SCALE,
    SPEED_OF_SOUND_M_S,
    SYLLABLE_AMPLITUDE,
    SYLLABLE_DURATION_S,
    SYLLABLE_RATE_HZ,
    VOICE_F0_RANGE_HZ,
    VOICE_HARMONICS,
)
from errors import ParameterError, ScenarioValidationError
from models import (
    AccessPointSpec,
    AudioTrace,
    GroundTruth,
    GroupSpec,
    NoiseSpec,
    Scenario,
    ScanRecord,
    SubjectSpec,
    Turn,
    Waypoint,
)

logger = logging.getLogger(__name__)

# One random stream per concern; the SNR does not perturb voices or scans
_VOICE_STREAM = 0
_NOISE_STREAM = 1
_SCAN_STREAM = 2


def _rng(scenario: Scenario, stream: int) -> np.random.Generator:
    return np.random.default_rng([scenario.seed, stream])


# ════════════════════════════════════════════════════════════════
# VALIDATION
# ════════════════════════════════════════════════════════════════


def validate_scenario(scenario: Scenario) -> None:
    """
    Check the invariants the pydantic model cannot express on its own.

    Raises:
        ScenarioValidationError: A subject in two groups, a speaker outside
            its group, overlapping turns within a group or an unknown scanner
    """
    membership: Dict[str, int] = {}
    for k, group in enumerate(scenario.groups):
        for member in group.members:
            if member in membership:
                raise ScenarioValidationError(
                    f"{member} belongs to groups {membership[member]} and {k}"
                )
            membership[member] = k

        turns = sorted(group.schedule, key=lambda t: t.start_s)
        for turn in turns:
            if turn.speaker_id not in group.members:
                raise ScenarioValidationError(
                    f"speaker {turn.speaker_id} is not a member of group {k}"
                )
        for first, second in zip(turns, turns[1:]):
            if second.start_s < first.end_s:
                raise ScenarioValidationError(
                    f"group {k}: turn of {second.speaker_id} at {second.start_s} s overlaps "
                    f"{first.speaker_id} ({first.start_s}-{first.end_s} s)"
                )

    if scenario.scan_subjects is not None:
        unknown = set(scenario.scan_subjects) - set(scenario.subject_ids())
        if unknown:
            raise ScenarioValidationError(f"unknown scanning subjects {sorted(unknown)}")


# ════════════════════════════════════════════════════════════════
# GEOMETRY
# ════════════════════════════════════════════════════════════════


def position_at(subject: SubjectSpec, times: np.ndarray, duration_s: float) -> np.ndarray:
    """
    Positions of a subject at scenario-relative times.

    Trajectories are sampled at the mobility rate and interpolated linearly
    in between. Static subjects come back as a single (1, 2) row.
    """
    if not subject.trajectory:
        return np.asarray(subject.position, dtype=np.float64).reshape(1, 2)
    wt = np.array([w.t for w in subject.trajectory])
    wx = np.array([w.x for w in subject.trajectory])
    wy = np.array([w.y for w in subject.trajectory])
    grid = np.arange(0.0, duration_s + 1.0 / MOBILITY_RATE_HZ, 1.0 / MOBILITY_RATE_HZ)
    gx = np.interp(grid, wt, wx)
    gy = np.interp(grid, wt, wy)
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    return np.column_stack((np.interp(times, grid, gx), np.interp(times, grid, gy)))


def _distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])


# ════════════════════════════════════════════════════════════════
# VOICE MODEL
# ════════════════════════════════════════════════════════════════


def _fundamentals(scenario: Scenario, rng: np.random.Generator) -> Dict[str, float]:
    """Pitch per subject; a draw is consumed for every subject so explicit pitches do not shift the others"""
    pitches = {}
    for subject in sorted(scenario.subjects, key=lambda s: s.id):
        drawn = float(rng.uniform(*VOICE_F0_RANGE_HZ))
        pitches[subject.id] = subject.fundamental_hz if subject.fundamental_hz is not None else drawn
    return pitches


def _syllables(turns: Sequence[Turn], rng: np.random.Generator) -> np.ndarray:
    """(onset, duration, amplitude) rows of Hann bursts filling the turns"""
    low, high = SYLLABLE_DURATION_S
    mean_gap = max(1.0 / SYLLABLE_RATE_HZ - 0.5 * (low + high), 0.0)
    rows: List[Tuple[float, float, float]] = []
    for turn in turns:
        onset = turn.start_s + rng.exponential(mean_gap)
        while True:
            duration = rng.uniform(low, high)
            if onset + duration > turn.end_s:
                break
            rows.append((onset, duration, rng.uniform(*SYLLABLE_AMPLITUDE)))
            onset += duration + rng.exponential(mean_gap)
    return np.array(rows, dtype=np.float64).reshape(-1, 3)


def harmonic_gains(rolloff_db: float, n_harmonics: int = VOICE_HARMONICS) -> np.ndarray:
    """Amplitude of harmonic k for a rolloff in dB per octave (6 dB/oct is about 1/k)"""
    k = np.arange(1, n_harmonics + 1)
    return 10.0 ** (-rolloff_db * np.log2(k) / 20.0)


class Voice:
    """One speaker's signal as a function of emission time"""

    def __init__(self, fundamental_hz: float, gains: np.ndarray, phases: np.ndarray, syllables: np.ndarray):
        self.fundamental_hz = fundamental_hz
        self.gains = gains
        self.phases = phases
        self.syllables = syllables
        self._k = np.arange(1, gains.size + 1)

    def __call__(self, tau: np.ndarray) -> np.ndarray:
        """Samples at emission times tau; tau must be non-decreasing"""
        out = np.zeros(tau.size)
        if not self.syllables.size:
            return out
        starts = np.searchsorted(tau, self.syllables[:, 0], side="left")
        ends = np.searchsorted(tau, self.syllables[:, 0] + self.syllables[:, 1], side="left")
        for (onset, duration, amplitude), a, b in zip(self.syllables, starts, ends):
            if b <= a:
                continue
            t = tau[a:b]
            envelope = 0.5 - 0.5 * np.cos(2.0 * np.pi * (t - onset) / duration)
            argument = 2.0 * np.pi * self.fundamental_hz * self._k[:, None] * t[None, :] + self.phases[:, None]
            out[a:b] += amplitude * envelope * (self.gains[:, None] * np.sin(argument)).sum(axis=0)
        return out


def voices(scenario: Scenario) -> Dict[str, Voice]:
    """Voice of every subject that holds at least one turn"""
    rng = _rng(scenario, _VOICE_STREAM)
    pitches = _fundamentals(scenario, rng)
    result: Dict[str, Voice] = {}
    for group in scenario.groups:
        gains = harmonic_gains(group.harmonic_rolloff_db)
        for speaker_id in sorted({t.speaker_id for t in group.schedule}):
            turns = sorted((t for t in group.schedule if t.speaker_id == speaker_id), key=lambda t: t.start_s)
            phases = rng.uniform(0.0, 2.0 * np.pi, gains.size)
            result[speaker_id] = Voice(pitches[speaker_id], gains, phases, _syllables(turns, rng))
    return result


# ════════════════════════════════════════════════════════════════
# AUDIO
# ════════════════════════════════════════════════════════════════


def offset_samples(subject: SubjectSpec, sample_rate_hz: int) -> int:
    """Clock offset rounded to whole samples"""
    return int(round(subject.clock_offset_s * sample_rate_hz))


def _received(
    scenario: Scenario,
    subject: SubjectSpec,
    speakers: Dict[str, Voice],
    n_samples: int,
) -> np.ndarray:
    """Sound pressure at the subject's microphone, on the device's own timebase"""
    fs = scenario.sample_rate_hz
    # true scenario time of every device sample; the device lags by its offset
    t = (np.arange(n_samples) - offset_samples(subject, fs)) / fs
    listener = position_at(subject, t, scenario.duration_s)
    pressure = np.zeros(n_samples)
    for speaker_id, voice in speakers.items():
        source = position_at(scenario.subject(speaker_id), t, scenario.duration_s)
        distance = np.maximum(_distance(listener, source), MIN_PROPAGATION_DISTANCE_M)
        pressure += voice(t - distance / SPEED_OF_SOUND_M_S) / distance
    return pressure


def _duty_mask(scenario: Scenario, n_samples: int) -> Optional[np.ndarray]:
    """True where the device records"""
    cycle = scenario.duty_cycle
    if cycle is None or cycle.off_s == 0:
        return None
    phase = np.mod(np.arange(n_samples) / scenario.sample_rate_hz, cycle.on_s + cycle.off_s)
    return phase < cycle.on_s


def synth_audio(scenario: Scenario) -> List[AudioTrace]:
    """
    Render one 16-bit quantized trace per subject.

    Each trace sums every speaker's voice delayed by d/343 s and attenuated by
    1/max(d, 0.5 m), scaled by the device gain and shifted by the clock
    offset. White Gaussian noise at the scenario SNR is added per device,
    relative to the mean RMS of the clean signals. One global scale keeps the
    loudest sample at the output peak, so gain ratios survive.

    Raises:
        ScenarioValidationError: If the scenario breaks a simulator invariant
    """
    validate_scenario(scenario)
    fs = scenario.sample_rate_hz
    n_samples = int(round(scenario.duration_s * fs))
    speakers = voices(scenario)
    clean = [_received(scenario, subject, speakers, n_samples) for subject in scenario.subjects]

    noise_std = 0.0
    if scenario.noise.snr_db is not None:
        ambient = float(np.mean([np.sqrt(np.mean(x * x)) for x in clean]))
        noise_std = ambient / 10.0 ** (scenario.noise.snr_db / 20.0)
    rng = _rng(scenario, _NOISE_STREAM)
    mask = _duty_mask(scenario, n_samples)

    recorded = []
    for subject, pressure in zip(scenario.subjects, clean):
        noise = rng.standard_normal(n_samples) * noise_std
        signal = subject.device_gain * (pressure + noise)
        if mask is not None:
            signal = np.where(mask, signal, 0.0)
        recorded.append(signal)

    peak = max(float(np.max(np.abs(y))) for y in recorded)
    scale = OUTPUT_PEAK / peak if peak > 0.0 else 1.0
    traces = [
        AudioTrace(
            subject_id=subject.id,
            sample_rate_hz=fs,
            start_time=scenario.start_time,
            samples=np.round(y * scale * PCM_FULL_SCALE) / PCM_FULL_SCALE,
        )
        for subject, y in zip(scenario.subjects, recorded)
    ]
    logger.info(
        f"Synthesized {len(traces)} traces for {scenario.name} "
        f"({scenario.duration_s:.0f} s, SNR {scenario.noise.snr_db} dB)"
    )
    return traces


# ════════════════════════════════════════════════════════════════
# WIFI SCANS
# ════════════════════════════════════════════════════════════════


def rssi(ap: AccessPointSpec, distance_m: float) -> float:
    """Log-distance path loss with a 1 m reference, before shadowing noise"""
    return ap.tx_power_dbm - 10.0 * ap.path_loss_exponent * np.log10(max(distance_m, 1.0))


def synth_scans(scenario: Scenario, interval_s: Optional[float] = None) -> List[ScanRecord]:
    """
    One scan per scanning subject per interval, at the interval centres.

    Readings carry Gaussian shadowing noise; those below the cutoff are
    dropped by ScanRecord.

    Raises:
        ParameterError: If the scenario has no access point
    """
    if not scenario.access_points:
        raise ParameterError("scan synthesis needs at least one access point")
    interval = interval_s or scenario.scan_interval_s
    scanners = set(scenario.scan_subjects) if scenario.scan_subjects is not None else set(scenario.subject_ids())
    rng = _rng(scenario, _SCAN_STREAM)
    times = np.arange(0.5 * interval, scenario.duration_s, interval)

    records: List[ScanRecord] = []
    for subject in scenario.subjects:
        if subject.id not in scanners:
            continue
        positions = np.broadcast_to(position_at(subject, times, scenario.duration_s), (times.size, 2))
        for t, (x, y) in zip(times, positions):
            readings = {}
            for ap in scenario.access_points:
                distance = float(np.hypot(x - ap.position[0], y - ap.position[1]))
                readings[ap.id] = rssi(ap, distance) + scenario.rssi_sigma_db * rng.standard_normal()
            records.append(ScanRecord(subject_id=subject.id, timestamp_s=scenario.start_time + float(t), readings=readings))
    logger.debug(f"Synthesized {len(records)} scans for {scenario.name}")
    return records


def scans_by_subject(records: Sequence[ScanRecord]) -> Dict[str, List[ScanRecord]]:
    logs: Dict[str, List[ScanRecord]] = {}
    for record in sorted(records, key=lambda r: (r.subject_id, r.timestamp_s)):
        logs.setdefault(record.subject_id, []).append(record)
    return logs


# ════════════════════════════════════════════════════════════════
# GROUND TRUTH, VARIANTS & FILES
# ════════════════════════════════════════════════════════════════


def ground_truth(scenario: Scenario) -> GroundTruth:
    return GroundTruth(
        scenario=scenario.name,
        window=(scenario.start_time, scenario.start_time + scenario.duration_s),
        groups=[list(g.members) for g in scenario.groups],
    )


def with_snr(scenario: Scenario, snr_db: Optional[float]) -> Scenario:
    """Copy with another ambient noise level (None = noiseless)"""
    return scenario.model_copy(update={"noise": NoiseSpec(snr_db=snr_db)})


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    return scenario.model_copy(update={"seed": seed})


def load_scenario(path: Path) -> Scenario:
    """
    Read and validate a scenario JSON file.

    Raises:
        pydantic.ValidationError: Malformed document
        ScenarioValidationError: Simulator invariant violated
    """
    scenario = Scenario.model_validate_json(Path(path).read_text(encoding="utf-8"))
    validate_scenario(scenario)
    return scenario


def save_scenario(scenario: Scenario, path: Path) -> None:
    Path(path).write_text(scenario.model_dump_json(indent=2) + "\n", encoding="utf-8")


# ════════════════════════════════════════════════════════════════
# SCENARIO LIBRARY
# ════════════════════════════════════════════════════════════════

# Heterogeneous phones: gains and clock offsets cycle through these
_GAINS = [1.0, 0.5, 2.0, 0.8, 1.5, 0.3, 3.0]
_OFFSETS_S = [0.0, 1.3, -0.7, 2.2, -1.8, 0.4, 3.1]


def _ids(first: int, count: int) -> List[str]:
    return [f"U{k}" for k in range(first, first + count)]


def _ring(centre: Tuple[float, float], count: int, radius: float) -> List[Tuple[float, float]]:
    angles = 2.0 * np.pi * np.arange(count) / count
    return [
        (round(centre[0] + radius * np.cos(a), 3), round(centre[1] + radius * np.sin(a), 3))
        for a in angles
    ]


def _rotation(speakers: Sequence[str], duration_s: float, turn_s: float = DEFAULT_TURN_S) -> List[Turn]:
    """Back-to-back turns cycling through the speakers"""
    turns = []
    start = 0.0
    k = 0
    while start < duration_s:
        end = min(start + turn_s, duration_s)
        turns.append(Turn(speaker_id=speakers[k % len(speakers)], start_s=start, end_s=end))
        start = end
        k += 1
    return turns


def _subject(
    subject_id: str,
    position: Tuple[float, float],
    fundamental_hz: Optional[float] = None,
    trajectory: Optional[List[Waypoint]] = None,
) -> SubjectSpec:
    k = int(subject_id[1:]) - 1
    return SubjectSpec(
        id=subject_id,
        position=position,
        device_gain=_GAINS[k % len(_GAINS)],
        clock_offset_s=_OFFSETS_S[k % len(_OFFSETS_S)],
        fundamental_hz=fundamental_hz,
        trajectory=trajectory or [],
    )


def _static_group(
    ids: List[str],
    centre: Tuple[float, float],
    radius: float,
    speakers: Dict[str, float],
    duration_s: float,
) -> Tuple[List[SubjectSpec], GroupSpec]:
    """Members on a ring around the centre; speakers map to their pitch"""
    subjects = [
        _subject(i, p, speakers.get(i)) for i, p in zip(ids, _ring(centre, len(ids), radius))
    ]
    return subjects, GroupSpec(members=ids, schedule=_rotation(list(speakers), duration_s))


def _walking_group(
    ids: List[str],
    path: List[Tuple[float, float, float]],
    spacing: float,
    speakers: Dict[str, float],
    duration_s: float,
) -> Tuple[List[SubjectSpec], GroupSpec]:
    """Members walk the same (t, x, y) path side by side"""
    subjects = []
    for k, subject_id in enumerate(ids):
        dy = (k - (len(ids) - 1) / 2.0) * spacing
        trajectory = [Waypoint(t=t, x=x, y=y + dy) for t, x, y in path]
        subjects.append(_subject(subject_id, (path[0][1], path[0][2] + dy), speakers.get(subject_id), trajectory))
    return subjects, GroupSpec(members=ids, schedule=_rotation(list(speakers), duration_s))


def _access_points(positions: List[Tuple[float, float]]) -> List[AccessPointSpec]:
    return [AccessPointSpec(id=f"ap:{k + 1:02d}", position=p) for k, p in enumerate(positions)]


def _scenario(name: str, description: str, duration_s: float, parts, aps, snr_db: float) -> Scenario:
    subjects = [s for members, _ in parts for s in members]
    return Scenario(
        name=name,
        description=description,
        duration_s=duration_s,
        subjects=sorted(subjects, key=lambda s: int(s.id[1:])),
        groups=[group for _, group in parts],
        noise=NoiseSpec(snr_db=snr_db),
        access_points=_access_points(aps),
    )


def scenario_library(duration_s: float = 60.0) -> Dict[str, Scenario]:
    """
    Desk-scale analogs of the field scenarios S1-S7 and the two pilot groups
    G6/G7 with a subject walking from one to the other.
    """
    d = duration_s
    library = {
        "S1": _scenario(
            "S1",
            "Indoor: two groups of 3 in neighbouring rooms",
            d,
            [
                _static_group(_ids(1, 3), (0.0, 0.0), 1.0, {"U1": 110.0, "U2": 150.0}, d),
                _static_group(_ids(4, 3), (8.0, 0.0), 1.0, {"U4": 190.0, "U5": 235.0}, d),
            ],
            [(0.0, 1.5), (8.0, 1.5), (4.0, 5.0)],
            20.0,
        ),
        "S2": _scenario(
            "S2",
            "Indoor: a group of 4 and a pair working in one lab",
            d,
            [
                _static_group(_ids(1, 4), (0.0, 0.0), 1.2, {"U1": 120.0, "U3": 165.0}, d),
                _static_group(_ids(5, 2), (6.0, 0.0), 0.8, {"U5": 215.0}, d),
            ],
            [(-2.0, 3.0), (8.0, 3.0), (3.0, -4.0)],
            20.0,
        ),
        "S3": _scenario(
            "S3",
            "Indoor: two groups of 3 at the cafeteria, high ambient noise",
            d,
            [
                _static_group(_ids(1, 3), (0.0, 0.0), 1.0, {"U1": 115.0, "U2": 160.0}, d),
                _static_group(_ids(4, 3), (6.0, 0.0), 1.0, {"U4": 200.0, "U6": 240.0}, d),
            ],
            [(-3.0, 2.0), (9.0, 2.0), (3.0, 6.0)],
            5.0,
        ),
        "S4": _scenario(
            "S4",
            "Indoor: 7 subjects attend a presentation, one speaker at a time",
            d,
            [
                (
                    [
                        _subject("U1", (0.0, 0.0), 125.0),
                        _subject("U2", (2.0, -1.5), 180.0),
                        _subject("U3", (2.0, 0.0)),
                        _subject("U4", (2.0, 1.5)),
                        _subject("U5", (3.5, -1.5), 220.0),
                        _subject("U6", (3.5, 0.0)),
                        _subject("U7", (3.5, 1.5)),
                    ],
                    GroupSpec(members=_ids(1, 7), schedule=_rotation(["U1", "U2", "U1", "U5"], d)),
                )
            ],
            [(-2.0, 3.0), (5.0, 3.0), (2.0, -4.0)],
            20.0,
        ),
        "S5": _scenario(
            "S5",
            "Indoor: two groups of 3 co-located in one room",
            d,
            [
                _static_group(_ids(1, 3), (0.0, 0.0), 1.0, {"U1": 110.0, "U3": 170.0}, d),
                _static_group(_ids(4, 3), (4.0, 0.0), 1.0, {"U5": 205.0, "U6": 145.0}, d),
            ],
            [(2.0, 22.0), (-18.0, -10.0), (22.0, -10.0)],
            20.0,
        ),
        "S6": _scenario(
            "S6",
            "Indoor: a roaming group of 3 passes a static group of 3",
            d,
            [
                _walking_group(_ids(1, 3), [(0.0, 0.0, 0.0), (d, 20.0, 0.0)], 1.0, {"U1": 120.0, "U2": 175.0}, d),
                _static_group(_ids(4, 3), (10.0, 8.0), 1.0, {"U4": 210.0, "U6": 150.0}, d),
            ],
            [(0.0, 3.0), (10.0, 3.0), (20.0, 3.0), (10.0, 10.0)],
            15.0,
        ),
        "S7": _scenario(
            "S7",
            "Outdoor: two roaming groups on parallel paths",
            d,
            [
                _walking_group(_ids(1, 3), [(0.0, 0.0, 0.0), (d, 30.0, 0.0)], 1.0, {"U1": 115.0, "U3": 185.0}, d),
                _walking_group(_ids(4, 2), [(0.0, 0.0, 15.0), (d, 30.0, 15.0)], 1.0, {"U4": 225.0}, d),
            ],
            [(5.0, -5.0), (15.0, 7.5), (25.0, 20.0)],
            10.0,
        ),
        "G6G7": _g6g7(),
    }
    return library


def _g6g7() -> Scenario:
    """Two pilot groups 18 m apart; U2 walks from G6 to G7 over 66 s"""
    duration = 72.0
    walker = _subject(
        "U2",
        (0.8, 0.0),
        trajectory=[Waypoint(t=0.0, x=0.8, y=0.0), Waypoint(t=3.0, x=0.8, y=0.0),
                    Waypoint(t=69.0, x=17.2, y=0.0), Waypoint(t=duration, x=17.2, y=0.0)],
    )
    subjects = [
        _subject("U1", (0.0, 0.0), 120.0),
        walker,
        _subject("U3", (0.0, 1.0)),
        _subject("U4", (18.0, 0.0), 210.0),
        _subject("U5", (18.0, 1.0)),
    ]
    return Scenario(
        name="G6G7",
        description="Pilot: groups G6 and G7 18 m apart, U2 walks between them",
        duration_s=duration,
        subjects=subjects,
        groups=[
            GroupSpec(members=["U1", "U3"], schedule=_rotation(["U1"], duration)),
            GroupSpec(members=["U4", "U5"], schedule=_rotation(["U4"], duration)),
        ],
        noise=NoiseSpec(snr_db=20.0),
        access_points=_access_points([(0.0, 2.0), (18.0, 2.0), (9.0, 5.0)]),
    )


def library_scenario(name: str, seed: Optional[int] = None) -> Scenario:
    """
    A library scenario by name, optionally reseeded.

    Raises:
        ParameterError: Unknown name
    """
    library = scenario_library()
    if name not in library:
        raise ParameterError(f"unknown scenario {name!r}; choose from {', '.join(library)}")
    scenario = library[name]
    return with_seed(scenario, seed) if seed is not None else scenario
