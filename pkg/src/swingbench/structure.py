"""Structureness analysis: chroma rendering, self-similarity, fitness
scape plots, and duration-banded structureness indicators.

The pipeline renders a 12-dimensional chroma sequence straight from the
symbolic timeline (1 Hz by default, so frames equal seconds), builds a
cosine self-similarity matrix with sub-threshold entries replaced by a
negative penalty, and scores every segment of the piece by how well an
optimal family of alignment paths explains its repeats elsewhere.

For a segment covering columns s..e of the SSM, a path is a chain of
cells stepping by (1,1), (2,1) or (1,2) from column s to column e; a
path family is a set of paths whose row spans do not overlap.  With the
optimal family's total score ``sigma``, cell count ``L`` and covered
rows ``gamma``, the segment's fitness is the harmonic mean of

    score    (sigma - |segment|) / L        and
    coverage (gamma - |segment|) / N,

both floored at zero: subtracting ``|segment|`` discounts the trivial
self-match, so a segment that repeats nowhere scores 0.  The scape plot
arranges fitness by (duration, center); the structureness indicator is
its maximum within a duration band.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .chords import ChordSymbol, chord_pitch_classes, parse_chord
from .corpus import Solo
from .tokenizer import DecodedTimeline

DEFAULT_SSM_THRESHOLD = 0.2
DEFAULT_SSM_PENALTY = -2.0
MELODY_WEIGHT = 1.0
CHORD_WEIGHT = 0.5

# Duration bands (in seconds at 1 Hz) for short-, medium-, long-term repeats.
DEFAULT_SI_BANDS: tuple[tuple[int, int | None], ...] = ((3, 8), (8, 15), (15, None))


@dataclass
class ChromaSequence:
    """Frame-wise pitch-class energy; nonzero frames have unit L2 norm."""

    frames: np.ndarray  # (N, 12)
    frame_rate: float = 1.0

    def __post_init__(self) -> None:
        self.frames = np.asarray(self.frames, dtype=float)
        if self.frames.ndim != 2 or self.frames.shape[1] != 12:
            raise ValueError("chroma frames must be an (N, 12) array")
        if self.frames.shape[0] < 2:
            raise ValueError("need at least 2 chroma frames")

    def __len__(self) -> int:
        return self.frames.shape[0]


def _accumulate(
    frames: np.ndarray,
    start: float,
    rate: float,
    onset: float,
    end: float,
    classes: Sequence[int],
    weight: float,
) -> None:
    n = frames.shape[0]
    first = max(int((onset - start) * rate), 0)
    last = min(int(np.ceil((end - start) * rate)), n)
    for f in range(first, last):
        lo = start + f / rate
        hi = lo + 1.0 / rate
        overlap = min(end, hi) - max(onset, lo)
        if overlap <= 0:
            continue
        for pc in classes:
            frames[f, pc] += weight * overlap


def render_chroma(
    notes: Sequence[tuple[float, float, int]],
    chords: Sequence[tuple[float, float, ChordSymbol]],
    span: tuple[float, float],
    frame_rate: float = 1.0,
) -> ChromaSequence:
    """Render chroma frames from (onset, duration, pitch) notes and chord spans.

    Melody pitch classes accumulate at weight 1.0 per sounding second
    inside a frame; the active chord's template pitch classes at 0.5.
    Nonzero frames are L2-normalized, silent frames stay zero.
    """
    start, end = span
    if end <= start:
        raise ValueError("empty timeline span")
    n = max(int(np.ceil((end - start) * frame_rate)), 2)
    frames = np.zeros((n, 12))
    for onset, duration, pitch in notes:
        _accumulate(frames, start, frame_rate, onset, onset + duration, [pitch % 12], MELODY_WEIGHT)
    for onset, chord_end, symbol in chords:
        classes = sorted(chord_pitch_classes(symbol))
        _accumulate(frames, start, frame_rate, onset, chord_end, classes, CHORD_WEIGHT)
    norms = np.linalg.norm(frames, axis=1)
    nonzero = norms > 0
    frames[nonzero] /= norms[nonzero, None]
    return ChromaSequence(frames, frame_rate)


def chroma_from_solo(solo: Solo, frame_rate: float = 1.0) -> ChromaSequence:
    notes = [(n.onset_sec, n.duration_sec, n.pitch) for n in solo.notes]
    chord_spans = []
    current: ChordSymbol | None = None
    current_start = 0.0
    span = solo.span()
    for beat in solo.beats:
        if beat.chord is None:
            continue
        symbol = parse_chord(beat.chord)
        if current is None:
            current, current_start = symbol, beat.onset_sec
        elif symbol != current:
            chord_spans.append((current_start, beat.onset_sec, current))
            current, current_start = symbol, beat.onset_sec
    if current is not None:
        chord_spans.append((current_start, span[1], current))
    return render_chroma(notes, chord_spans, span, frame_rate)


def chroma_from_timeline(timeline: DecodedTimeline, frame_rate: float = 1.0) -> ChromaSequence:
    notes = [(n.onset_sec, n.duration_sec, n.pitch) for n in timeline.notes]
    return render_chroma(
        notes, timeline.chord_intervals(), (0.0, timeline.end_sec), frame_rate
    )


def compute_ssm(
    chroma: ChromaSequence,
    threshold: float = DEFAULT_SSM_THRESHOLD,
    penalty: float = DEFAULT_SSM_PENALTY,
) -> np.ndarray:
    """Cosine self-similarity matrix with thresholding enhancement.

    The diagonal is pinned to 1 (a frame always matches itself, silent or
    not); entries below ``threshold`` are replaced by ``penalty`` so that
    spurious weak matches cost a path more than they contribute.
    """
    f = chroma.frames
    m = f @ f.T
    np.clip(m, -1.0, 1.0, out=m)
    np.fill_diagonal(m, 1.0)
    m[m < threshold] = penalty
    return m


# --- optimal path family fitness -------------------------------------------


def _batched_family_stats(
    ssm: np.ndarray, duration: int, starts: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Optimal path-family score, cell count, and row coverage for every
    segment [s, s + duration) with s in ``starts``, in one DP sweep.

    DP state per segment: column 0 is the escape lane (rows not covered
    by any path), column m >= 1 is a path cell in segment column m - 1.
    Paths enter at segment column 0 from the escape lane or a finished
    path on the previous row, and may finish only in the last column.
    Ties break deterministically: escape over path end, and step (1,1)
    over (2,1) over (1,2).
    """
    n = ssm.shape[0]
    d = int(duration)
    cols = starts[:, None] + np.arange(d)[None, :]
    seg = ssm[:, cols]  # (n, B, d)
    b = len(starts)

    neg = -np.inf
    d_prev = np.full((b, d + 1), neg)
    l_prev = np.zeros((b, d + 1), dtype=np.int64)
    g_prev = np.zeros((b, d + 1), dtype=np.int64)
    d_prev2 = np.full((b, d + 1), neg)
    l_prev2 = np.zeros_like(l_prev)
    g_prev2 = np.zeros_like(g_prev)

    d_prev[:, 0] = 0.0
    d_prev[:, 1] = seg[0, :, 0]
    l_prev[:, 1] = 1
    g_prev[:, 1] = 1

    step_rows = np.array([1, 2, 1], dtype=np.int64)

    for row in range(1, n):
        s_row = seg[row]
        d_new = np.empty_like(d_prev)
        l_new = np.empty_like(l_prev)
        g_new = np.empty_like(g_prev)

        take_end = d_prev[:, d] > d_prev[:, 0]
        d_new[:, 0] = np.where(take_end, d_prev[:, d], d_prev[:, 0])
        l_new[:, 0] = np.where(take_end, l_prev[:, d], l_prev[:, 0])
        g_new[:, 0] = np.where(take_end, g_prev[:, d], g_prev[:, 0])

        d_new[:, 1] = d_new[:, 0] + s_row[:, 0]
        l_new[:, 1] = l_new[:, 0] + 1
        g_new[:, 1] = g_new[:, 0] + 1

        if d >= 2:
            cand = np.stack((d_prev[:, 1:d], d_prev2[:, 1:d], d_prev[:, 0 : d - 1]))
            # the (1,2) slice would read the escape lane at segment column 1,
            # which would let paths start mid-segment: forbid it
            cand[2, :, 0] = neg
            choice = np.argmax(cand, axis=0)
            sel = choice[None]
            d_new[:, 2:] = s_row[:, 1:] + np.take_along_axis(cand, sel, axis=0)[0]
            l_cand = np.stack((l_prev[:, 1:d], l_prev2[:, 1:d], l_prev[:, 0 : d - 1]))
            g_cand = np.stack((g_prev[:, 1:d], g_prev2[:, 1:d], g_prev[:, 0 : d - 1]))
            l_new[:, 2:] = np.take_along_axis(l_cand, sel, axis=0)[0] + 1
            g_new[:, 2:] = np.take_along_axis(g_cand, sel, axis=0)[0] + step_rows[choice]

        d_prev2, d_prev = d_prev, d_new
        l_prev2, l_prev = l_prev, l_new
        g_prev2, g_prev = g_prev, g_new

    take_end = d_prev[:, d] > d_prev[:, 0]
    sigma = np.where(take_end, d_prev[:, d], d_prev[:, 0])
    cells = np.where(take_end, l_prev[:, d], l_prev[:, 0])
    coverage = np.where(take_end, g_prev[:, d], g_prev[:, 0])
    return sigma, cells, coverage


def _fitness_from_stats(
    sigma: np.ndarray, cells: np.ndarray, coverage: np.ndarray, duration: int, n: int
) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        score_norm = np.where(cells > 0, (sigma - duration) / np.maximum(cells, 1), 0.0)
        cov_norm = (coverage - duration) / n
        fitness = np.where(
            (score_norm > 0) & (cov_norm > 0),
            2.0 * score_norm * cov_norm / (score_norm + cov_norm),
            0.0,
        )
    return fitness


def segment_fitness(ssm: np.ndarray, start: int, end: int) -> float:
    """Fitness of the segment spanning frames ``start..end`` inclusive."""
    ssm = np.asarray(ssm, dtype=float)
    n = ssm.shape[0]
    if not 0 <= start <= end < n:
        raise ValueError(f"invalid segment [{start}, {end}] for {n} frames")
    duration = end - start + 1
    sigma, cells, coverage = _batched_family_stats(
        ssm, duration, np.array([start], dtype=np.int64)
    )
    return float(_fitness_from_stats(sigma, cells, coverage, duration, n)[0])


def scape_plot(ssm: np.ndarray, stride: int = 1) -> np.ndarray:
    """Fitness of every segment, arranged by (duration, center).

    Row ``i`` (0-based) holds segments of duration ``i + 1`` frames;
    column ``j`` is the segment's center frame, rounding half up.  Cells
    whose segment would exceed the piece are zero.  ``stride`` subsamples
    both the duration and start grids for large pieces.
    """
    ssm = np.asarray(ssm, dtype=float)
    n = ssm.shape[0]
    if ssm.shape != (n, n):
        raise ValueError("SSM must be square")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    plot = np.zeros((n, n))
    for duration in range(1, n + 1, stride):
        starts = np.arange(0, n - duration + 1, stride, dtype=np.int64)
        sigma, cells, coverage = _batched_family_stats(ssm, duration, starts)
        fit = _fitness_from_stats(sigma, cells, coverage, duration, n)
        centers = starts + duration // 2
        plot[duration - 1, centers] = fit
    return plot


def structureness_indicator(
    plot: np.ndarray, lower: int = 1, upper: int | None = None
) -> float:
    """Maximum fitness over segment durations in [lower, upper] (in frames;
    seconds at the default 1 Hz).  ``upper=None`` searches up to the piece
    length."""
    n = plot.shape[0]
    if upper is None:
        upper = n
    upper = min(upper, n)
    if lower < 1 or lower > n:
        raise ValueError(f"lower bound {lower} outside 1..{n}")
    if lower > upper:
        raise ValueError(f"empty duration band [{lower}, {upper}]")
    return float(plot[lower - 1 : upper, :].max())


def scape_plot_for_solo(
    solo: Solo,
    frame_rate: float = 1.0,
    threshold: float = DEFAULT_SSM_THRESHOLD,
    penalty: float = DEFAULT_SSM_PENALTY,
    stride: int | None = None,
) -> np.ndarray:
    chroma = chroma_from_solo(solo, frame_rate)
    return _scape_from_chroma(chroma, threshold, penalty, stride)


def scape_plot_for_timeline(
    timeline: DecodedTimeline,
    frame_rate: float = 1.0,
    threshold: float = DEFAULT_SSM_THRESHOLD,
    penalty: float = DEFAULT_SSM_PENALTY,
    stride: int | None = None,
) -> np.ndarray:
    chroma = chroma_from_timeline(timeline, frame_rate)
    return _scape_from_chroma(chroma, threshold, penalty, stride)


def _scape_from_chroma(
    chroma: ChromaSequence, threshold: float, penalty: float, stride: int | None
) -> np.ndarray:
    ssm = compute_ssm(chroma, threshold, penalty)
    if stride is None:
        stride = 1 if len(chroma) <= 400 else 2
    return scape_plot(ssm, stride=stride)


def band_indicators(
    plot: np.ndarray, bands: Sequence[tuple[int, int | None]] = DEFAULT_SI_BANDS
) -> list[float]:
    return [structureness_indicator(plot, lo, hi) for lo, hi in bands]


# --- exports ----------------------------------------------------------------


def write_scape_text(plot: np.ndarray, path: str | Path) -> None:
    """Plain-text matrix, one row per duration, 6-decimal fixed point."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for row in plot:
            fh.write(" ".join(f"{v:.6f}" for v in row))
            fh.write("\n")


def write_scape_pgm(plot: np.ndarray, path: str | Path) -> None:
    """Binary 8-bit portable graymap, pixel value = round(255 * fitness)."""
    path = Path(path)
    n_rows, n_cols = plot.shape
    pixels = np.floor(255.0 * np.clip(plot, 0.0, 1.0) + 0.5).astype(np.uint8)
    with path.open("wb") as fh:
        fh.write(f"P5\n{n_cols} {n_rows}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
