"""Lead-sheet data model and corpus interchange format.

A solo is a melody track (notes with onset, duration, pitch, loudness,
phrase and midlevel-unit annotations) plus a beat track (beat onsets,
chords, form parts).  Corpora are stored as JSON Lines: one solo record
per line, with positional field lists so the column order is fixed:

    {"id": "...",
     "notes": [[onset_sec, duration_sec, pitch, loudness_db, phrase_start, mlu_label], ...],
     "beats": [[onset_sec, duration_sec, bar_index, position_in_bar, chord], ...],
     "parts": [[letter, repetition, start_bar, end_bar], ...]}

``mlu_label`` and ``chord`` are null when absent.  Floats are written with
full precision, so save -> load is the identity on valid solos.

Only 4/4 material is accepted: every bar must contain exactly four beats
at positions 0..3, otherwise the 64-subunit position grid of the event
codec would be meaningless.

Adapting a source stored in some other container (e.g. a relational
database export) is the job of an external converter that emits this
schema; see :data:`CONVERTER_CONTRACT`.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .chords import ChordError, parse_chord, transpose_chord_string

log = logging.getLogger(__name__)

# Retained midlevel-unit types; configurable per corpus.
DEFAULT_MLU_LABELS: tuple[str, ...] = (
    "line",
    "lick",
    "melody",
    "rhythm",
    "theme",
    "quote",
    "fragment",
    "expressive",
    "void",
)

CONVERTER_CONTRACT = """\
Converter stub contract (not implemented here): a converter adapting an
external source must emit one JSON record per solo with keys id/notes/
beats/parts exactly as documented in this module, seconds as decimals
with at least microsecond precision, loudness in dB for every note
(imputing it where the source lacks one), and must drop or split any
solo containing a non-4/4 bar."""


class CorpusError(ValueError):
    """A corpus file violates the interchange schema or a solo invariant."""


class EmptyCorpusError(CorpusError):
    """The corpus file contains no solo records."""


class TranspositionError(ValueError):
    """Transposition would move a note outside the MIDI range."""


@dataclass(frozen=True)
class Note:
    onset_sec: float
    duration_sec: float
    pitch: int
    loudness_db: float
    phrase_start: bool = False
    mlu_label: str | None = None


@dataclass(frozen=True)
class Beat:
    onset_sec: float
    duration_sec: float
    bar_index: int
    position_in_bar: int
    chord: str | None = None


@dataclass(frozen=True)
class FormPart:
    letter: str
    repetition: int
    start_bar: int
    end_bar: int


@dataclass(frozen=True)
class Solo:
    id: str
    notes: tuple[Note, ...]
    beats: tuple[Beat, ...]
    parts: tuple[FormPart, ...] = ()

    @property
    def bar_count(self) -> int:
        return len(self.beats) // 4

    @property
    def first_bar(self) -> int:
        return self.beats[0].bar_index if self.beats else 0

    def span(self) -> tuple[float, float]:
        """Time interval covered by the beat track."""
        if not self.beats:
            return (0.0, 0.0)
        last = self.beats[-1]
        return (self.beats[0].onset_sec, last.onset_sec + last.duration_sec)


def validate_solo(
    solo: Solo, mlu_labels: Sequence[str] | None = DEFAULT_MLU_LABELS
) -> list[str]:
    """Return every invariant violation of a solo (empty list if valid).

    Violations are data, not exceptions: callers decide whether to reject.
    ``mlu_labels`` is the allow-list for midlevel-unit labels; pass None to
    accept any label.
    """
    out: list[str] = []
    for i, n in enumerate(solo.notes):
        where = f"note {i} (onset {n.onset_sec})"
        if not math.isfinite(n.onset_sec) or n.onset_sec < 0:
            out.append(f"{where}: onset_sec must be finite and >= 0")
        if not math.isfinite(n.duration_sec) or n.duration_sec <= 0:
            out.append(f"{where}: duration_sec must be > 0")
        if not 0 <= n.pitch <= 127:
            out.append(f"{where}: pitch {n.pitch} outside 0-127")
        if not math.isfinite(n.loudness_db):
            out.append(f"{where}: loudness_db must be finite")
        if (
            n.mlu_label is not None
            and mlu_labels is not None
            and n.mlu_label not in mlu_labels
        ):
            out.append(f"{where}: mlu_label {n.mlu_label!r} not in allow-list")
    for a, b in zip(solo.notes, solo.notes[1:]):
        if b.onset_sec < a.onset_sec:
            out.append("notes not sorted by onset")
            break

    if not solo.beats:
        out.append("beat track is empty")
    else:
        by_bar: dict[int, list[Beat]] = {}
        for b in solo.beats:
            if b.duration_sec <= 0 or not math.isfinite(b.duration_sec):
                out.append(f"beat at {b.onset_sec}: duration_sec must be > 0")
            if b.bar_index < 0:
                out.append(f"beat at {b.onset_sec}: bar_index must be >= 0")
            by_bar.setdefault(b.bar_index, []).append(b)
        bars = sorted(by_bar)
        if bars != list(range(bars[0], bars[0] + len(bars))):
            out.append("bar indices are not contiguous")
        for bar, beats in sorted(by_bar.items()):
            if [b.position_in_bar for b in beats] != [0, 1, 2, 3]:
                out.append(
                    f"bar {bar}: expected exactly 4 beats at positions 0-3 (4/4 only), "
                    f"got positions {[b.position_in_bar for b in beats]}"
                )
            if any(y.onset_sec <= x.onset_sec for x, y in zip(beats, beats[1:])):
                out.append(f"bar {bar}: beat onsets not strictly increasing")
        for a, b in zip(solo.beats, solo.beats[1:]):
            if b.onset_sec <= a.onset_sec:
                out.append("beat track onsets not strictly increasing")
                break
        start, end = solo.span()
        for i, n in enumerate(solo.notes):
            if not start <= n.onset_sec <= end:
                out.append(
                    f"note {i} (onset {n.onset_sec}) outside beat-track span "
                    f"[{start}, {end}]"
                )
        for b in solo.beats:
            if b.chord is not None:
                try:
                    parse_chord(b.chord)
                except ChordError as exc:
                    out.append(f"beat at {b.onset_sec}: {exc}")

    prev: FormPart | None = None
    for p in solo.parts:
        if p.start_bar > p.end_bar:
            out.append(f"part {p.letter}{p.repetition}: start_bar > end_bar")
        if p.repetition < 1:
            out.append(f"part {p.letter}{p.repetition}: repetition must be >= 1")
        if prev is not None and p.start_bar <= prev.end_bar:
            out.append(
                f"parts {prev.letter}{prev.repetition} and {p.letter}{p.repetition} overlap"
            )
        prev = p
    return out


# --- interchange format -------------------------------------------------


def _note_to_row(n: Note) -> list:
    return [n.onset_sec, n.duration_sec, n.pitch, n.loudness_db, n.phrase_start, n.mlu_label]


def _beat_to_row(b: Beat) -> list:
    return [b.onset_sec, b.duration_sec, b.bar_index, b.position_in_bar, b.chord]


def _part_to_row(p: FormPart) -> list:
    return [p.letter, p.repetition, p.start_bar, p.end_bar]


def solo_to_record(solo: Solo) -> dict:
    return {
        "id": solo.id,
        "notes": [_note_to_row(n) for n in solo.notes],
        "beats": [_beat_to_row(b) for b in solo.beats],
        "parts": [_part_to_row(p) for p in solo.parts],
    }


def _field(row: list, idx: int, name: str, kind, where: str):
    try:
        value = row[idx]
    except IndexError:
        raise CorpusError(f"{where}: missing field {name!r}") from None
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is bool and isinstance(value, bool):
        return value
    if kind is str and isinstance(value, str):
        return value
    raise CorpusError(f"{where}: field {name!r} has wrong type ({value!r})")


def solo_from_record(record: dict, where: str = "record") -> Solo:
    if not isinstance(record, dict) or "id" not in record:
        raise CorpusError(f"{where}: record must be an object with an 'id' field")
    solo_id = record["id"]
    where = f"solo {solo_id!r}"
    notes = []
    for i, row in enumerate(record.get("notes", [])):
        w = f"{where} note {i}"
        mlu = row[5] if len(row) > 5 else None
        if mlu is not None and not isinstance(mlu, str):
            raise CorpusError(f"{w}: field 'mlu_label' has wrong type ({mlu!r})")
        notes.append(
            Note(
                onset_sec=_field(row, 0, "onset_sec", float, w),
                duration_sec=_field(row, 1, "duration_sec", float, w),
                pitch=_field(row, 2, "pitch", int, w),
                loudness_db=_field(row, 3, "loudness_db", float, w),
                phrase_start=_field(row, 4, "phrase_start", bool, w),
                mlu_label=mlu,
            )
        )
    beats = []
    for i, row in enumerate(record.get("beats", [])):
        w = f"{where} beat {i}"
        chord = row[4] if len(row) > 4 else None
        if chord is not None and not isinstance(chord, str):
            raise CorpusError(f"{w}: field 'chord' has wrong type ({chord!r})")
        beats.append(
            Beat(
                onset_sec=_field(row, 0, "onset_sec", float, w),
                duration_sec=_field(row, 1, "duration_sec", float, w),
                bar_index=_field(row, 2, "bar_index", int, w),
                position_in_bar=_field(row, 3, "position_in_bar", int, w),
                chord=chord,
            )
        )
    parts = []
    for i, row in enumerate(record.get("parts", [])):
        w = f"{where} part {i}"
        parts.append(
            FormPart(
                letter=_field(row, 0, "letter", str, w),
                repetition=_field(row, 1, "repetition", int, w),
                start_bar=_field(row, 2, "start_bar", int, w),
                end_bar=_field(row, 3, "end_bar", int, w),
            )
        )
    return Solo(id=str(solo_id), notes=tuple(notes), beats=tuple(beats), parts=tuple(parts))


def save_corpus(solos: Iterable[Solo], path: str | Path) -> None:
    """Write solos to a JSON Lines corpus file."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for solo in solos:
            fh.write(json.dumps(solo_to_record(solo), separators=(",", ":")))
            fh.write("\n")


def load_corpus(
    path: str | Path, mlu_labels: Sequence[str] | None = DEFAULT_MLU_LABELS
) -> list[Solo]:
    """Load and validate a JSON Lines corpus file.

    Raises :class:`CorpusError` naming the offending solo and field on any
    schema or invariant violation, and :class:`EmptyCorpusError` when the
    file holds no records.
    """
    path = Path(path)
    solos: list[Solo] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path} line {lineno}: invalid JSON ({exc})") from None
            solo = solo_from_record(record, where=f"{path} line {lineno}")
            violations = validate_solo(solo, mlu_labels=mlu_labels)
            if violations:
                raise CorpusError(
                    f"solo {solo.id!r}: " + "; ".join(violations)
                )
            solos.append(solo)
    if not solos:
        raise EmptyCorpusError(f"{path}: corpus contains no solos")
    log.info(
        "loaded %d solos (%s)",
        len(solos),
        ", ".join(f"{s.id}: {len(s.notes)} notes/{len(s.beats)} beats" for s in solos),
    )
    return solos


def transpose_solo(solo: Solo, semitones: int) -> Solo:
    """Transpose every pitch and chord by ``semitones`` (range -3..+3).

    Timing, durations, loudness and structure are untouched; chord tone
    and slash shift by the same amount modulo 12 while the quality stays.
    """
    if not -3 <= semitones <= 3:
        raise ValueError(f"transposition {semitones} outside the -3..+3 range")
    if semitones == 0:
        return solo
    notes = []
    for i, n in enumerate(solo.notes):
        pitch = n.pitch + semitones
        if not 0 <= pitch <= 127:
            raise TranspositionError(
                f"solo {solo.id!r} note {i} (onset {n.onset_sec}): "
                f"pitch {n.pitch}{semitones:+d} leaves the MIDI range"
            )
        notes.append(replace(n, pitch=pitch))
    beats = tuple(
        replace(b, chord=transpose_chord_string(b.chord, semitones))
        if b.chord is not None
        else b
        for b in solo.beats
    )
    return Solo(id=solo.id, notes=tuple(notes), beats=beats, parts=solo.parts)
