"""
Audio front end
Bandpass, normalization, clock-drift alignment, complex cepstrum and the
segment-wise acoustic-context similarity between two devices
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import soundfile as sf
from scipy import signal

from constants import (
    CepstralPart,
    DEFAULT_BAND_LOW_HZ,
    DEFAULT_BAND_HIGH_HZ,
    DEFAULT_FILTER_ORDER,
    DEFAULT_MAX_SHIFT_S,
    DEFAULT_MIN_OVERLAP_S,
    DEFAULT_SEGMENT_LEN_S,
    DEFAULT_CEPSTRUM_FLOOR_DB,
    PCM_SUBTYPE,
)
from errors import AlignmentError, DegenerateInputError, ParameterError
from models import AudioConfig, AudioTrace, CepstrumSegment, DriftEstimate, PairFeatureSeries
from models.graph import edge_key

logger = logging.getLogger(__name__)

# Peak below half a 16-bit LSB: the segment carries no recorded sound
SILENCE_PEAK = 2.0 ** -16


# ════════════════════════════════════════════════════════════════
# WAV I/O
# ════════════════════════════════════════════════════════════════


def load_wav(path: Path, subject_id: Optional[str] = None, start_time: float = 0.0) -> AudioTrace:
    """
    Read a WAV file as a mono trace.

    Args:
        path: WAV file
        subject_id: Subject identifier (defaults to the file stem)
        start_time: Device-clock time of the first sample

    Returns:
        AudioTrace with float64 samples in [-1, 1]
    """
    path = Path(path)
    data, sample_rate = sf.read(str(path), dtype="float64", always_2d=True)
    samples = data.mean(axis=1) if data.shape[1] > 1 else data[:, 0]
    return AudioTrace(
        subject_id=subject_id or path.stem,
        sample_rate_hz=int(sample_rate),
        start_time=start_time,
        samples=samples,
    )


def write_wav(trace: AudioTrace, path: Path) -> None:
    """Write a trace as 16-bit PCM mono"""
    sf.write(str(path), np.clip(trace.samples, -1.0, 1.0), trace.sample_rate_hz, subtype=PCM_SUBTYPE)


# ════════════════════════════════════════════════════════════════
# PREPROCESSING
# ════════════════════════════════════════════════════════════════


def bandpass(
    trace: AudioTrace,
    low_hz: float = DEFAULT_BAND_LOW_HZ,
    high_hz: float = DEFAULT_BAND_HIGH_HZ,
    order: int = DEFAULT_FILTER_ORDER,
) -> AudioTrace:
    """
    Zero-phase Butterworth bandpass.

    Args:
        trace: Input trace
        low_hz: Lower band edge
        high_hz: Upper band edge
        order: Butterworth prototype order

    Returns:
        Filtered trace, same length and timebase

    Raises:
        ParameterError: If the band edges are not 0 < low < high < fs/2
    """
    nyquist = trace.sample_rate_hz / 2.0
    if not 0.0 < low_hz < high_hz < nyquist:
        raise ParameterError(
            f"invalid band [{low_hz}, {high_hz}] Hz for sample rate {trace.sample_rate_hz} Hz"
        )

    sos = signal.butter(order, [low_hz, high_hz], btype="bandpass", fs=trace.sample_rate_hz, output="sos")
    # sosfiltfilt needs the input longer than its edge padding
    default_padlen = 3 * (2 * sos.shape[0] + 1)
    kwargs = {} if trace.n_samples > default_padlen else {"padlen": trace.n_samples - 1}
    filtered = signal.sosfiltfilt(sos, trace.samples, **kwargs)
    return trace.replace(filtered)


def normalize(trace: AudioTrace) -> AudioTrace:
    """Peak-normalize to max |sample| == 1; silent traces come back unchanged"""
    peak = float(np.max(np.abs(trace.samples)))
    if peak == 0.0:
        return trace
    return trace.replace(trace.samples / peak)


def preprocess(trace: AudioTrace, config: Optional[AudioConfig] = None) -> AudioTrace:
    """Bandpass then normalize, with the configured band"""
    config = config or AudioConfig()
    filtered = bandpass(trace, config.band_low_hz, config.band_high_hz, config.filter_order)
    return normalize(filtered)


def is_silent(samples: np.ndarray) -> bool:
    return samples.size == 0 or float(np.max(np.abs(samples))) < SILENCE_PEAK


def window(trace: AudioTrace, t0: float, t1: float) -> AudioTrace:
    """
    Cut a trace to the absolute time window [t0, t1).

    Raises:
        ParameterError: If t1 <= t0
        AlignmentError: If the trace does not intersect the window
    """
    if t1 <= t0:
        raise ParameterError(f"empty window [{t0}, {t1}]")
    fs = trace.sample_rate_hz
    first = max(0, int(np.ceil((t0 - trace.start_time) * fs - 1e-9)))
    last = min(trace.n_samples, int(np.floor((t1 - trace.start_time) * fs + 1e-9)))
    if last <= first:
        raise AlignmentError(
            f"trace {trace.subject_id} [{trace.start_time:.3f}, {trace.end_time:.3f}] "
            f"does not intersect window [{t0}, {t1}]"
        )
    return trace.replace(trace.samples[first:last], start_time=trace.start_time + first / fs)


# ════════════════════════════════════════════════════════════════
# CLOCK DRIFT
# ════════════════════════════════════════════════════════════════


def estimate_drift(
    reference: AudioTrace,
    target: AudioTrace,
    max_shift_s: float = DEFAULT_MAX_SHIFT_S,
    min_overlap_s: float = DEFAULT_MIN_OVERLAP_S,
) -> DriftEstimate:
    """
    Estimate how far the target's clock lags the reference.

    Every candidate lag within ±max_shift_s is scored by the cross-correlation
    normalized by the energy of the overlapping parts only, so short overlaps
    at large lags are not penalized against the zero-lag overlap.

    Args:
        reference: Reference trace (preprocessed)
        target: Target trace (preprocessed, same sample rate)
        max_shift_s: Search window
        min_overlap_s: Minimum overlap for a lag to count

    Returns:
        DriftEstimate; shift_s > 0 means the target's content appears later

    Raises:
        AlignmentError: Different sample rates or no lag with enough overlap
    """
    if reference.sample_rate_hz != target.sample_rate_hz:
        raise AlignmentError(
            f"sample rates differ: {reference.sample_rate_hz} vs {target.sample_rate_hz}"
        )
    fs = reference.sample_rate_hz
    ref = reference.samples
    tgt = target.samples
    n_ref, n_tgt = ref.size, tgt.size
    start_offset = target.start_time - reference.start_time

    # corr[k] = sum_n tgt[n + lag] * ref[n], lag = k - (n_ref - 1)
    corr = signal.correlate(tgt, ref, mode="full", method="fft")
    lags = np.arange(-(n_ref - 1), n_tgt)

    lo = np.maximum(0, -lags)
    hi = np.minimum(n_ref, n_tgt - lags)
    overlap = hi - lo
    shift = start_offset + lags / fs
    valid = (overlap >= int(np.ceil(min_overlap_s * fs))) & (np.abs(shift) <= max_shift_s + 0.5 / fs)
    if not np.any(valid):
        raise AlignmentError(
            f"{target.subject_id} vs {reference.subject_id}: no lag within ±{max_shift_s} s "
            f"leaves {min_overlap_s} s of overlap"
        )

    ref_energy = np.concatenate(([0.0], np.cumsum(ref * ref)))
    tgt_energy = np.concatenate(([0.0], np.cumsum(tgt * tgt)))
    energy = (ref_energy[hi] - ref_energy[lo]) * (tgt_energy[hi + lags] - tgt_energy[lo + lags])

    score = np.full(lags.size, -np.inf)
    # cumulative-sum round-off must not pass for signal energy
    usable = valid & (energy > 1e-12 * ref_energy[-1] * tgt_energy[-1])
    if not np.any(usable):
        raise AlignmentError(f"{target.subject_id} vs {reference.subject_id}: no signal energy to align")
    score[usable] = corr[usable] / np.sqrt(energy[usable])

    best = int(np.argmax(score))
    estimate = DriftEstimate(
        reference_id=reference.subject_id,
        target_id=target.subject_id,
        shift_s=float(shift[best]),
        peak_correlation=float(np.clip(score[best], -1.0, 1.0)),
    )
    logger.debug(
        f"Drift {estimate.target_id} vs {estimate.reference_id}: "
        f"{estimate.shift_s:+.6f} s (r={estimate.peak_correlation:.3f})"
    )
    return estimate


def align(
    traces: List[AudioTrace],
    reference_id: str,
    max_shift_s: float = DEFAULT_MAX_SHIFT_S,
    min_overlap_s: float = DEFAULT_MIN_OVERLAP_S,
) -> List[AudioTrace]:
    """
    Remove each trace's drift against the reference and cut all traces to
    their common span.

    Silent traces carry nothing to correlate; they keep their nominal start.

    Returns:
        Traces in input order, equal length, equal start_time

    Raises:
        ParameterError: If the reference is not in the list
        AlignmentError: If a drift cannot be estimated or the spans do not overlap
    """
    by_id = {t.subject_id: t for t in traces}
    if reference_id not in by_id:
        raise ParameterError(f"reference {reference_id} not among traces")
    if len(traces) == 1:
        return list(traces)

    reference = by_id[reference_id]
    reference_silent = is_silent(reference.samples)
    if reference_silent:
        logger.warning(f"Reference {reference_id} is silent; drift correction skipped")

    corrected: List[AudioTrace] = []
    for trace in traces:
        if trace.subject_id == reference_id or reference_silent:
            corrected.append(trace)
            continue
        if is_silent(trace.samples):
            logger.warning(f"{trace.subject_id} is silent; keeping its nominal start time")
            corrected.append(trace)
            continue
        drift = estimate_drift(reference, trace, max_shift_s, min_overlap_s)
        logger.info(f"Drift of {trace.subject_id}: {drift.shift_s:+.4f} s")
        corrected.append(trace.replace(trace.samples, start_time=trace.start_time - drift.shift_s))

    fs = reference.sample_rate_hz
    t0 = max(t.start_time for t in corrected)
    t1 = min(t.end_time for t in corrected)
    if t1 - t0 < 1.0 / fs:
        raise AlignmentError(f"traces share no common span after alignment ([{t0:.3f}, {t1:.3f}])")

    offsets = [int(round((t0 - t.start_time) * fs)) for t in corrected]
    length = min(t.n_samples - off for t, off in zip(corrected, offsets))
    if length <= 0:
        raise AlignmentError("traces share no common span after alignment")
    return [t.replace(t.samples[off:off + length], start_time=t0) for t, off in zip(corrected, offsets)]


# ════════════════════════════════════════════════════════════════
# CEPSTRUM
# ════════════════════════════════════════════════════════════════


def _unwrap(phase: np.ndarray) -> np.ndarray:
    """Unwrapped phase with its linear (pure delay) component removed"""
    samples = phase.size
    unwrapped = np.unwrap(phase)
    if samples < 2:
        return unwrapped
    center = (samples + 1) // 2
    ndelay = np.round(unwrapped[center] / np.pi)
    return unwrapped - np.pi * ndelay * np.arange(samples) / center


def _floored_magnitude(magnitude: np.ndarray, floor_db: Optional[float]) -> np.ndarray:
    if floor_db is not None:
        return np.maximum(magnitude, magnitude.max() * 10.0 ** (-floor_db / 20.0))
    return np.maximum(magnitude, np.finfo(np.float64).tiny)


def ccep(segment_samples, floor_db: Optional[float] = None) -> np.ndarray:
    """
    Complex cepstrum of one segment.

    IFT(log|FT(x)| + j * unwrapped phase). A gain g on the input only moves
    coefficient 0, by log g.

    Args:
        segment_samples: Real samples
        floor_db: Optional log-spectrum floor below the segment's peak bin;
            None evaluates the plain formula

    Returns:
        Real coefficients, one per input sample

    Raises:
        DegenerateInputError: Empty or all-zero segment
    """
    x = np.asarray(segment_samples, dtype=np.float64).reshape(-1)
    if x.size == 0 or not np.any(x):
        raise DegenerateInputError("cepstrum of an empty or all-zero segment is undefined")
    spectrum = np.fft.fft(x)
    magnitude = _floored_magnitude(np.abs(spectrum), floor_db)
    log_spectrum = np.log(magnitude) + 1j * _unwrap(np.angle(spectrum))
    return np.fft.ifft(log_spectrum).real


def _even_cepstrum(x: np.ndarray, floor_db: Optional[float]) -> np.ndarray:
    """Even half of the complex cepstrum (the cepstrum of the log magnitude)"""
    magnitude = _floored_magnitude(np.abs(np.fft.rfft(x)), floor_db)
    return np.fft.irfft(np.log(magnitude), n=x.size)


def _segment_coefficients(
    trace: AudioTrace,
    segment_len_s: float,
    floor_db: Optional[float],
    part: CepstralPart,
) -> List[Optional[np.ndarray]]:
    """Coefficients per whole segment; None for silent segments"""
    seg_len = int(round(segment_len_s * trace.sample_rate_hz))
    if seg_len < 2:
        raise ParameterError(f"segment of {segment_len_s} s is shorter than two samples")
    n_segments = trace.n_samples // seg_len

    coefficients: List[Optional[np.ndarray]] = []
    for k in range(n_segments):
        segment = trace.samples[k * seg_len:(k + 1) * seg_len]
        if is_silent(segment):
            coefficients.append(None)
        elif part == CepstralPart.EVEN:
            coefficients.append(_even_cepstrum(segment, floor_db))
        else:
            coefficients.append(ccep(segment, floor_db))
    return coefficients


def segment_cepstra(
    trace: AudioTrace,
    segment_len_s: float = DEFAULT_SEGMENT_LEN_S,
    floor_db: Optional[float] = None,
    part: CepstralPart = CepstralPart.COMPLEX,
) -> List[CepstrumSegment]:
    """Cepstrum of every whole segment; silent segments and the trailing partial one are omitted"""
    return [
        CepstrumSegment(subject_id=trace.subject_id, segment_index=k, coefficients=c)
        for k, c in enumerate(_segment_coefficients(trace, segment_len_s, floor_db, part))
        if c is not None
    ]


# ════════════════════════════════════════════════════════════════
# ACOUSTIC CONTEXT SIMILARITY
# ════════════════════════════════════════════════════════════════


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Zero-lag Pearson correlation over coefficients 1..N-1"""
    x = a[1:] - a[1:].mean()
    y = b[1:] - b[1:].mean()
    denominator = np.sqrt(np.dot(x, x) * np.dot(y, y))
    if denominator == 0.0:
        return float("nan")
    return float(np.clip(np.dot(x, y) / denominator, -1.0, 1.0))


def check_same_span(trace_i: AudioTrace, trace_j: AudioTrace) -> None:
    """Raises AlignmentError unless both traces share rate, start and length"""
    if trace_i.sample_rate_hz != trace_j.sample_rate_hz:
        raise AlignmentError(
            f"sample rates differ: {trace_i.sample_rate_hz} vs {trace_j.sample_rate_hz}"
        )
    half_sample = 0.5 / trace_i.sample_rate_hz
    if abs(trace_i.start_time - trace_j.start_time) > half_sample or trace_i.n_samples != trace_j.n_samples:
        raise AlignmentError(
            f"{trace_i.subject_id} and {trace_j.subject_id} cover different spans; align them first"
        )


def _series_from_coefficients(
    subject_i: str,
    subject_j: str,
    coeffs_i: List[Optional[np.ndarray]],
    coeffs_j: List[Optional[np.ndarray]],
) -> PairFeatureSeries:
    values = np.array([
        _pearson(a, b) if a is not None and b is not None else np.nan
        for a, b in zip(coeffs_i, coeffs_j)
    ])
    return PairFeatureSeries(
        subject_i=subject_i,
        subject_j=subject_j,
        kind="acoustic",
        indices=np.arange(values.size),
        values=values,
    )


def acoustic_similarity(
    trace_i: AudioTrace,
    trace_j: AudioTrace,
    segment_len_s: float = DEFAULT_SEGMENT_LEN_S,
    floor_db: Optional[float] = DEFAULT_CEPSTRUM_FLOOR_DB,
    part: CepstralPart = CepstralPart.EVEN,
) -> PairFeatureSeries:
    """
    Per-segment correlation of two aligned traces' cepstra.

    The defaults correlate the even cepstral half of a floored log spectrum;
    part=CepstralPart.COMPLEX with floor_db=None correlates the exact complex
    cepstrum instead.

    Args:
        trace_i: First trace (aligned, preprocessed)
        trace_j: Second trace, same span as trace_i
        segment_len_s: Segment length
        floor_db: Log-spectrum floor below each segment's peak (None = no floor)
        part: Cepstral part correlated

    Returns:
        PairFeatureSeries of kind "acoustic"; silent segments are NaN

    Raises:
        AlignmentError: If the traces cover different spans
    """
    check_same_span(trace_i, trace_j)
    return _series_from_coefficients(
        trace_i.subject_id,
        trace_j.subject_id,
        _segment_coefficients(trace_i, segment_len_s, floor_db, part),
        _segment_coefficients(trace_j, segment_len_s, floor_db, part),
    )


def acoustic_similarity_matrix(
    traces: List[AudioTrace],
    config: Optional[AudioConfig] = None,
) -> Dict[Tuple[str, str], PairFeatureSeries]:
    """Acoustic series for every unordered pair; cepstra are computed once per subject"""
    config = config or AudioConfig()
    ordered = sorted(traces, key=lambda t: t.subject_id)
    for other in ordered[1:]:
        check_same_span(ordered[0], other)

    coefficients = {
        t.subject_id: _segment_coefficients(t, config.segment_len_s, config.floor_db, config.cepstral_part)
        for t in ordered
    }
    result: Dict[Tuple[str, str], PairFeatureSeries] = {}
    for a, trace_a in enumerate(ordered):
        for trace_b in ordered[a + 1:]:
            i, j = trace_a.subject_id, trace_b.subject_id
            result[edge_key(i, j)] = _series_from_coefficients(i, j, coefficients[i], coefficients[j])
    logger.debug(f"Acoustic similarity computed for {len(result)} pairs")
    return result
