"""Event vocabulary and the bidirectional codec between solos and tokens.

A solo becomes a flat stream of events.  Within every bar: a ``Bar``
marker, then each occupied 64th-grid position in ascending order.  A
position carries, in fixed order, the beat's tempo pair (every beat
position always does), a chord triple when the chord changes, and the
notes starting there, each one the contiguous triple ``NoteVelocity,
NoteOn, NoteDuration`` optionally prefixed by ``Phrase`` and ``MLU``
markers.  Form parts open right after the ``Bar`` of their first bar
(``PartStart``, ``RepStart``) and close at the end of their last bar
(``RepEnd``, ``PartEnd``).

Quantization:

* loudness dB -> velocity bin ``v = floor((80 + 3*(dB - 65)) / 4)``
  clipped to 1..32, rendered back to MIDI velocity ``4*v - 1``;
* note length -> 64th-note multiples 1..32 relative to the containing
  beat, sub-64th notes dropped, longer than a half note clipped;
* onset -> grid position ``round(p_beat + 16 * (t_note - t_beat) / d_beat)``
  where beats sit at positions 0/16/32/48 of the 64-subunit bar;
* beat duration -> one of 5 tempo classes over the bpm boundaries
  (50, 80, 110, 140, 180, 320) and one of 12 even steps inside the class.
"""

from __future__ import annotations

import math
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .chords import NUM_CHORD_TYPES, ChordSymbol, parse_chord
from .corpus import DEFAULT_MLU_LABELS, Beat, Note, Solo

# Token categories.
BAR = "Bar"
POSITION = "Position"
TEMPO_CLASS = "TempoClass"
TEMPO = "Tempo"
NOTE_VELOCITY = "NoteVelocity"
NOTE_ON = "NoteOn"
NOTE_DURATION = "NoteDuration"
CHORD_TONE = "ChordTone"
CHORD_TYPE = "ChordType"
CHORD_SLASH = "ChordSlash"
PHRASE = "Phrase"
MLU = "MLU"
PART_START = "PartStart"
PART_END = "PartEnd"
REP_START = "RepStart"
REP_END = "RepEnd"

STRUCTURE_CATEGORIES = (PHRASE, MLU, PART_START, PART_END, REP_START, REP_END)

POSITIONS_PER_BAR = 64
POSITIONS_PER_BEAT = 16
BEAT_POSITIONS = (0, 16, 32, 48)

TEMPO_CLASS_BOUNDS_BPM = (50.0, 80.0, 110.0, 140.0, 180.0, 320.0)
TEMPO_STEPS_PER_CLASS = 12
NUM_TEMPO_CLASSES = len(TEMPO_CLASS_BOUNDS_BPM) - 1

MIN_VELOCITY_BIN, MAX_VELOCITY_BIN = 1, 32
MIN_DURATION_UNITS, MAX_DURATION_UNITS = 1, 32


class QuantizationError(ValueError):
    """Invalid input to one of the quantization formulas."""


class TokenizationError(ValueError):
    """A solo cannot be encoded; the message names the offending item."""


class TokenGrammarError(ValueError):
    """A token stream violates the event grammar."""

    def __init__(self, index: int, message: str, expected: Sequence[str] = ()):
        super().__init__(f"token {index}: {message}"
                         + (f" (expected one of {list(expected)})" if expected else ""))
        self.index = index
        self.expected = tuple(expected)


@dataclass(frozen=True)
class EventToken:
    category: str
    value: int = 0

    def __str__(self) -> str:
        return f"{self.category}({self.value})"


_TOKEN_RE = re.compile(r"^([A-Za-z]+)\((-?\d+)\)$")


def parse_token(text: str) -> EventToken:
    m = _TOKEN_RE.match(text.strip())
    if m is None:
        raise ValueError(f"malformed token text {text!r}")
    return EventToken(m.group(1), int(m.group(2)))


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


# --- quantization formulas ----------------------------------------------


def quantize_velocity(loudness_db: float) -> int:
    """Map loudness in dB to a velocity bin in 1..32."""
    if not math.isfinite(loudness_db):
        raise QuantizationError(f"loudness must be finite, got {loudness_db}")
    v = math.floor((80.0 + 3.0 * (loudness_db - 65.0)) / 4.0)
    return min(max(v, MIN_VELOCITY_BIN), MAX_VELOCITY_BIN)


def velocity_to_midi(velocity_bin: int) -> int:
    """MIDI velocity for a bin: 1->3, 2->7, ..., 32->127."""
    if not MIN_VELOCITY_BIN <= velocity_bin <= MAX_VELOCITY_BIN:
        raise QuantizationError(f"velocity bin {velocity_bin} outside 1..32")
    return 4 * velocity_bin - 1


def quantize_duration(note_duration_sec: float, beat_duration_sec: float) -> int | None:
    """Note length in 64th-note units (1..32), or None for sub-64th notes.

    Durations longer than a half note (32 units) are clipped to 32.
    """
    if note_duration_sec <= 0 or beat_duration_sec <= 0:
        raise QuantizationError("durations must be positive")
    units = _round_half_up(POSITIONS_PER_BEAT * note_duration_sec / beat_duration_sec)
    if units < MIN_DURATION_UNITS:
        return None
    return min(units, MAX_DURATION_UNITS)


def justify_position(
    beat_position: int, beat_onset_sec: float, beat_duration_sec: float, note_onset_sec: float
) -> int:
    """Grid position of a note onset, justified against its containing beat."""
    if beat_position not in BEAT_POSITIONS:
        raise QuantizationError(f"beat position {beat_position} not one of {BEAT_POSITIONS}")
    if beat_duration_sec <= 0:
        raise QuantizationError("beat duration must be positive")
    if not beat_onset_sec <= note_onset_sec < beat_onset_sec + beat_duration_sec:
        raise QuantizationError(
            f"note onset {note_onset_sec} outside beat "
            f"[{beat_onset_sec}, {beat_onset_sec + beat_duration_sec})"
        )
    p = beat_position + POSITIONS_PER_BEAT * (note_onset_sec - beat_onset_sec) / beat_duration_sec
    return min(max(_round_half_up(p), 0), POSITIONS_PER_BAR - 1)


def derive_tempo_events(beat_duration_sec: float) -> tuple[int, int]:
    """Tempo class (1..5) and global tempo step (0..59) for a beat duration.

    Out-of-range bpm values are clamped into [50, 320).
    """
    if beat_duration_sec <= 0:
        raise QuantizationError("beat duration must be positive")
    bpm = 60.0 / beat_duration_sec
    bounds = TEMPO_CLASS_BOUNDS_BPM
    cls = bisect_right(bounds, bpm) - 1
    cls = min(max(cls, 0), NUM_TEMPO_CLASSES - 1)
    lo, hi = bounds[cls], bounds[cls + 1]
    step = math.floor(TEMPO_STEPS_PER_CLASS * (bpm - lo) / (hi - lo))
    step = min(max(step, 0), TEMPO_STEPS_PER_CLASS - 1)
    return cls + 1, TEMPO_STEPS_PER_CLASS * cls + step


def tempo_value_to_bpm(tempo_value: int) -> float:
    """Lower-edge bpm of a global tempo step (inverse of the quantizer)."""
    if not 0 <= tempo_value < TEMPO_STEPS_PER_CLASS * NUM_TEMPO_CLASSES:
        raise QuantizationError(f"tempo value {tempo_value} outside 0..59")
    cls, step = divmod(tempo_value, TEMPO_STEPS_PER_CLASS)
    lo, hi = TEMPO_CLASS_BOUNDS_BPM[cls], TEMPO_CLASS_BOUNDS_BPM[cls + 1]
    return lo + step * (hi - lo) / TEMPO_STEPS_PER_CLASS


# --- vocabulary -----------------------------------------------------------


DEFAULT_PART_LETTERS = ("A", "B", "C", "D", "E", "F", "G", "H")
DEFAULT_MAX_REPETITION = 12


class Vocabulary:
    """Dense bijection between event tokens and integer ids.

    MLU labels, form-part letters and the repetition ceiling are
    configuration; everything else is fixed by the codec.
    """

    def __init__(
        self,
        mlu_labels: Sequence[str] = DEFAULT_MLU_LABELS,
        part_letters: Sequence[str] = DEFAULT_PART_LETTERS,
        max_repetition: int = DEFAULT_MAX_REPETITION,
    ):
        self.mlu_labels = tuple(mlu_labels)
        self.part_letters = tuple(part_letters)
        self.max_repetition = int(max_repetition)
        if len(set(self.mlu_labels)) != len(self.mlu_labels):
            raise ValueError("duplicate MLU labels")
        if len(set(self.part_letters)) != len(self.part_letters):
            raise ValueError("duplicate part letters")
        if self.max_repetition < 1:
            raise ValueError("max_repetition must be >= 1")

        self._ranges: dict[str, range] = {
            BAR: range(0, 1),
            POSITION: range(0, POSITIONS_PER_BAR),
            TEMPO_CLASS: range(1, NUM_TEMPO_CLASSES + 1),
            TEMPO: range(0, TEMPO_STEPS_PER_CLASS * NUM_TEMPO_CLASSES),
            NOTE_VELOCITY: range(MIN_VELOCITY_BIN, MAX_VELOCITY_BIN + 1),
            NOTE_ON: range(0, 128),
            NOTE_DURATION: range(MIN_DURATION_UNITS, MAX_DURATION_UNITS + 1),
            CHORD_TONE: range(0, 12),
            CHORD_TYPE: range(0, NUM_CHORD_TYPES),
            CHORD_SLASH: range(0, 12),
            PHRASE: range(0, 1),
            MLU: range(0, len(self.mlu_labels)),
            PART_START: range(0, len(self.part_letters)),
            PART_END: range(0, len(self.part_letters)),
            REP_START: range(1, self.max_repetition + 1),
            REP_END: range(1, self.max_repetition + 1),
        }
        self._tokens: list[EventToken] = []
        for category, values in self._ranges.items():
            self._tokens.extend(EventToken(category, v) for v in values)
        self._ids = {tok: i for i, tok in enumerate(self._tokens)}
        self._mlu_index = {label: i for i, label in enumerate(self.mlu_labels)}
        self._part_index = {letter: i for i, letter in enumerate(self.part_letters)}

    def __len__(self) -> int:
        return len(self._tokens)

    @property
    def size(self) -> int:
        return len(self._tokens)

    @property
    def chord_token_count(self) -> int:
        return (
            len(self._ranges[CHORD_TONE])
            + len(self._ranges[CHORD_TYPE])
            + len(self._ranges[CHORD_SLASH])
        )

    def value_range(self, category: str) -> range:
        return self._ranges[category]

    def is_valid(self, token: EventToken) -> bool:
        return token in self._ids

    def token_id(self, token: EventToken) -> int:
        try:
            return self._ids[token]
        except KeyError:
            raise KeyError(f"token {token} not in vocabulary") from None

    def token(self, token_id: int) -> EventToken:
        return self._tokens[token_id]

    def tokens_to_ids(self, tokens: Iterable[EventToken]) -> list[int]:
        return [self.token_id(t) for t in tokens]

    def ids_to_tokens(self, ids: Iterable[int]) -> list[EventToken]:
        return [self._tokens[i] for i in ids]

    def mlu_index(self, label: str) -> int:
        try:
            return self._mlu_index[label]
        except KeyError:
            raise TokenizationError(
                f"MLU label {label!r} not in the vocabulary allow-list {self.mlu_labels}"
            ) from None

    def part_index(self, letter: str) -> int:
        try:
            return self._part_index[letter]
        except KeyError:
            raise TokenizationError(
                f"part letter {letter!r} not in the vocabulary set {self.part_letters}"
            ) from None

    @property
    def bar_token_id(self) -> int:
        return self._ids[EventToken(BAR, 0)]

    def save(self, path: str | Path) -> None:
        """Write the token ->  id sidecar (tab-separated, one token per line)."""
        path = Path(path)
        with path.open("w", encoding="utf-8") as fh:
            fh.write(f"# vocabulary size {self.size}\n")
            fh.write(f"# MLU labels: {','.join(self.mlu_labels)}\n")
            fh.write(f"# part letters: {','.join(self.part_letters)}\n")
            fh.write(f"# max repetition: {self.max_repetition}\n")
            for i, tok in enumerate(self._tokens):
                fh.write(f"{tok}\t{i}\n")


DEFAULT_VOCABULARY = Vocabulary()


# --- token file I/O -------------------------------------------------------


def write_tokens(tokens: Iterable[EventToken], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for tok in tokens:
            fh.write(f"{tok}\n")


def read_tokens(path: str | Path, vocab: Vocabulary = DEFAULT_VOCABULARY) -> list[EventToken]:
    path = Path(path)
    tokens = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                tok = parse_token(line)
            except ValueError as exc:
                raise ValueError(f"{path} line {lineno}: {exc}") from None
            if not vocab.is_valid(tok):
                raise ValueError(f"{path} line {lineno}: token {tok} not in vocabulary")
            tokens.append(tok)
    return tokens


# --- encoding -------------------------------------------------------------


def beat_for_onset(beats: Sequence[Beat], onsets: Sequence[float], onset: float) -> Beat:
    """The beat whose [onset, onset+duration) interval contains ``onset``."""
    idx = bisect_right(onsets, onset) - 1
    if idx < 0:
        raise TokenizationError(f"onset {onset} precedes the first beat")
    beat = beats[idx]
    if onset >= beat.onset_sec + beat.duration_sec:
        raise TokenizationError(
            f"onset {onset} falls in a gap after the beat at {beat.onset_sec}"
        )
    return beat


def note_grid_position(note: Note, beats: Sequence[Beat], onsets: Sequence[float]) -> int:
    beat = beat_for_onset(beats, onsets, note.onset_sec)
    return justify_position(
        POSITIONS_PER_BEAT * beat.position_in_bar,
        beat.onset_sec,
        beat.duration_sec,
        note.onset_sec,
    )


@dataclass
class _PositionEntry:
    tempo: tuple[int, int] | None = None
    chord: ChordSymbol | None = None
    notes: list[tuple[Note, int, int]] = field(default_factory=list)  # (note, vbin, units)


def encode_solo(
    solo: Solo,
    include_structure: bool = True,
    vocab: Vocabulary = DEFAULT_VOCABULARY,
) -> list[EventToken]:
    """Encode a solo into its event-token sequence.

    Notes shorter than a 64th note are silently dropped.  With
    ``include_structure=False`` the Phrase/MLU/Part/Rep markers are
    omitted and only notes, meter, tempo, and chords remain.
    """
    tokens: list[EventToken] = []
    beats = solo.beats
    onsets = [b.onset_sec for b in beats]
    by_bar: dict[int, list[Beat]] = {}
    for b in beats:
        by_bar.setdefault(b.bar_index, []).append(b)

    notes_by_bar: dict[int, list[Note]] = {}
    for i, note in enumerate(solo.notes):
        try:
            beat = beat_for_onset(beats, onsets, note.onset_sec)
        except TokenizationError as exc:
            raise TokenizationError(f"solo {solo.id!r} note {i}: {exc}") from None
        notes_by_bar.setdefault(beat.bar_index, []).append(note)

    current_chord: ChordSymbol | None = None
    for bar_index in sorted(by_bar):
        entries: dict[int, _PositionEntry] = {}

        def entry(pos: int) -> _PositionEntry:
            return entries.setdefault(pos, _PositionEntry())

        for beat in by_bar[bar_index]:
            pos = POSITIONS_PER_BEAT * beat.position_in_bar
            e = entry(pos)
            e.tempo = derive_tempo_events(beat.duration_sec)
            if beat.chord is not None:
                symbol = parse_chord(beat.chord)
                if symbol != current_chord:
                    e.chord = symbol
                    current_chord = symbol

        for i, note in enumerate(notes_by_bar.get(bar_index, [])):
            try:
                pos = note_grid_position(note, beats, onsets)
                units = quantize_duration(note.duration_sec, beat_for_onset(beats, onsets, note.onset_sec).duration_sec)
                vbin = quantize_velocity(note.loudness_db)
            except QuantizationError as exc:
                raise TokenizationError(
                    f"solo {solo.id!r} note at onset {note.onset_sec}: {exc}"
                ) from None
            if units is None:
                continue  # sub-64th note
            entry(pos).notes.append((note, vbin, units))

        tokens.append(EventToken(BAR, 0))
        if include_structure:
            for part in solo.parts:
                if part.start_bar == bar_index:
                    tokens.append(EventToken(PART_START, vocab.part_index(part.letter)))
                    tokens.append(EventToken(REP_START, part.repetition))
        for pos in sorted(entries):
            e = entries[pos]
            tokens.append(EventToken(POSITION, pos))
            if e.tempo is not None:
                cls, step = e.tempo
                tokens.append(EventToken(TEMPO_CLASS, cls))
                tokens.append(EventToken(TEMPO, step))
            if e.chord is not None:
                tokens.append(EventToken(CHORD_TONE, e.chord.tone))
                tokens.append(EventToken(CHORD_TYPE, e.chord.type_index))
                tokens.append(EventToken(CHORD_SLASH, e.chord.slash))
            for note, vbin, units in e.notes:
                if include_structure:
                    if note.phrase_start:
                        tokens.append(EventToken(PHRASE, 0))
                    if note.mlu_label is not None:
                        tokens.append(EventToken(MLU, vocab.mlu_index(note.mlu_label)))
                tokens.append(EventToken(NOTE_VELOCITY, vbin))
                tokens.append(EventToken(NOTE_ON, note.pitch))
                tokens.append(EventToken(NOTE_DURATION, units))
        if include_structure:
            for part in reversed(solo.parts):
                if part.end_bar == bar_index:
                    tokens.append(EventToken(REP_END, part.repetition))
                    tokens.append(EventToken(PART_END, vocab.part_index(part.letter)))
    return tokens


# --- decoding -------------------------------------------------------------


@dataclass(frozen=True)
class DecodedNote:
    onset_sec: float
    duration_sec: float
    pitch: int
    velocity_bin: int
    velocity_midi: int
    duration_units: int
    bar: int
    position: int
    phrase_start: bool = False
    mlu_label: str | None = None


@dataclass(frozen=True)
class DecodedChord:
    onset_sec: float
    bar: int
    position: int
    symbol: ChordSymbol


@dataclass(frozen=True)
class TempoPoint:
    onset_sec: float
    bar: int
    position: int
    bpm: float


@dataclass(frozen=True)
class StructureMarker:
    bar: int
    category: str
    value: int


@dataclass
class DecodedTimeline:
    """Timeline reconstructed from a token stream.

    ``bar_times`` holds the start time of each bar plus the final end
    time, so it has ``bar_count + 1`` entries.
    """

    notes: list[DecodedNote]
    chords: list[DecodedChord]
    tempo_curve: list[TempoPoint]
    structure: list[StructureMarker]
    bar_times: list[float]

    @property
    def bar_count(self) -> int:
        return len(self.bar_times) - 1

    @property
    def end_sec(self) -> float:
        return self.bar_times[-1]

    def notes_by_bar(self) -> list[list[DecodedNote]]:
        bars: list[list[DecodedNote]] = [[] for _ in range(self.bar_count)]
        for n in self.notes:
            bars[n.bar].append(n)
        return bars

    def chord_intervals(self) -> list[tuple[float, float, ChordSymbol]]:
        """(start, end, chord) spans; each chord sounds until the next one."""
        out = []
        for i, c in enumerate(self.chords):
            end = self.chords[i + 1].onset_sec if i + 1 < len(self.chords) else self.end_sec
            out.append((c.onset_sec, end, c.symbol))
        return out

    def chord_changes(self) -> list[ChordSymbol]:
        """Chord sequence with consecutive duplicates collapsed."""
        out: list[ChordSymbol] = []
        for c in self.chords:
            if not out or c.symbol != out[-1]:
                out.append(c.symbol)
        return out


_TRIPLE_NEXT = {
    NOTE_VELOCITY: (NOTE_ON,),
    NOTE_ON: (NOTE_DURATION,),
    CHORD_TONE: (CHORD_TYPE,),
    CHORD_TYPE: (CHORD_SLASH,),
    TEMPO_CLASS: (TEMPO,),
    PHRASE: (MLU, NOTE_VELOCITY),
    MLU: (NOTE_VELOCITY,),
}

_TOP_CATEGORIES = (
    BAR,
    POSITION,
    TEMPO_CLASS,
    CHORD_TONE,
    PHRASE,
    MLU,
    NOTE_VELOCITY,
    PART_START,
    PART_END,
    REP_START,
    REP_END,
)

_NEEDS_POSITION = (TEMPO_CLASS, CHORD_TONE, PHRASE, MLU, NOTE_VELOCITY)


def decode_tokens(
    tokens: Sequence[EventToken],
    vocab: Vocabulary = DEFAULT_VOCABULARY,
    default_bpm: float = 120.0,
) -> DecodedTimeline:
    """Decode a grammar-valid token stream back into a timed timeline.

    Raises :class:`TokenGrammarError` with the token index on the first
    violation: unknown tokens, dangling triple members, content before the
    first bar or position, or non-increasing positions within a bar.
    """
    notes: list[DecodedNote] = []
    chords: list[DecodedChord] = []
    tempo_curve: list[TempoPoint] = []
    structure: list[StructureMarker] = []
    bar_times: list[float] = []

    bar = -1
    bar_start = 0.0
    beat_durs = [60.0 / default_bpm] * 4
    last_position: int | None = None
    position_time = 0.0
    current_beat = 0

    expected: tuple[str, ...] | None = None
    pending_note: dict | None = None
    pending_phrase = False
    pending_mlu: int | None = None
    pending_chord_tone = -1
    pending_chord_type = -1

    def close_bar() -> None:
        nonlocal bar_start
        bar_start += sum(beat_durs)

    for i, tok in enumerate(tokens):
        if not vocab.is_valid(tok):
            raise TokenGrammarError(i, f"unknown token {tok}")
        cat, val = tok.category, tok.value

        if expected is not None:
            if cat not in expected:
                raise TokenGrammarError(i, f"got {tok} inside an event group", expected)
            if cat == TEMPO:
                bpm = tempo_value_to_bpm(val)
                for b in range(current_beat, 4):
                    beat_durs[b] = 60.0 / bpm
                tempo_curve.append(TempoPoint(position_time, bar, last_position or 0, bpm))
                expected = None
            elif cat == CHORD_TYPE:
                pending_chord_type = val
                expected = _TRIPLE_NEXT[cat]
            elif cat == CHORD_SLASH:
                symbol = ChordSymbol(pending_chord_tone, pending_chord_type, val)
                chords.append(DecodedChord(position_time, bar, last_position or 0, symbol))
                expected = None
            elif cat == MLU:
                pending_mlu = val
                expected = _TRIPLE_NEXT[cat]
            elif cat == NOTE_VELOCITY:
                pending_note = {"vbin": val}
                expected = _TRIPLE_NEXT[cat]
            elif cat == NOTE_ON:
                pending_note["pitch"] = val
                expected = _TRIPLE_NEXT[cat]
            elif cat == NOTE_DURATION:
                dur = val / POSITIONS_PER_BEAT * beat_durs[current_beat]
                notes.append(
                    DecodedNote(
                        onset_sec=position_time,
                        duration_sec=dur,
                        pitch=pending_note["pitch"],
                        velocity_bin=pending_note["vbin"],
                        velocity_midi=velocity_to_midi(pending_note["vbin"]),
                        duration_units=val,
                        bar=bar,
                        position=last_position or 0,
                        phrase_start=pending_phrase,
                        mlu_label=vocab.mlu_labels[pending_mlu]
                        if pending_mlu is not None
                        else None,
                    )
                )
                pending_note = None
                pending_phrase = False
                pending_mlu = None
                expected = None
            continue

        if cat not in _TOP_CATEGORIES:
            if cat in (NOTE_ON, NOTE_DURATION):
                raise TokenGrammarError(i, f"{cat} not preceded by NoteVelocity", (NOTE_VELOCITY,))
            if cat == TEMPO:
                raise TokenGrammarError(i, "Tempo not preceded by TempoClass", (TEMPO_CLASS,))
            raise TokenGrammarError(i, f"{cat} not preceded by ChordTone", (CHORD_TONE,))

        if cat == BAR:
            if bar >= 0:
                close_bar()
            bar += 1
            bar_times.append(bar_start)
            beat_durs = [beat_durs[3]] * 4
            last_position = None
            current_beat = 0
            continue
        if bar < 0:
            raise TokenGrammarError(i, f"{tok} before the first Bar", (BAR,))
        if cat == POSITION:
            if last_position is not None and val <= last_position:
                raise TokenGrammarError(
                    i, f"Position({val}) does not increase past Position({last_position})"
                )
            last_position = val
            current_beat = val // POSITIONS_PER_BEAT
            position_time = (
                bar_start
                + sum(beat_durs[:current_beat])
                + (val - POSITIONS_PER_BEAT * current_beat)
                / POSITIONS_PER_BEAT
                * beat_durs[current_beat]
            )
            continue
        if cat in (PART_START, PART_END, REP_START, REP_END):
            structure.append(StructureMarker(bar, cat, val))
            continue
        if last_position is None:
            raise TokenGrammarError(i, f"{tok} before the first Position of the bar", (POSITION,))
        if cat == TEMPO_CLASS:
            expected = _TRIPLE_NEXT[cat]
        elif cat == CHORD_TONE:
            pending_chord_tone = val
            expected = _TRIPLE_NEXT[cat]
        elif cat == PHRASE:
            pending_phrase = True
            expected = _TRIPLE_NEXT[cat]
        elif cat == MLU:
            pending_mlu = val
            expected = _TRIPLE_NEXT[cat]
        elif cat == NOTE_VELOCITY:
            pending_note = {"vbin": val}
            expected = _TRIPLE_NEXT[cat]

    if expected is not None:
        raise TokenGrammarError(len(tokens), "stream ends inside an event group", expected)
    if bar < 0:
        raise TokenGrammarError(0, "stream contains no Bar token", (BAR,))
    close_bar()
    bar_times.append(bar_start)
    return DecodedTimeline(notes, chords, tempo_curve, structure, bar_times)


def repair_token_stream(
    tokens: Sequence[EventToken], vocab: Vocabulary = DEFAULT_VOCABULARY
) -> tuple[list[EventToken], int]:
    """Drop tokens that violate the grammar; returns (repaired, drop count).

    Used to clean sampled streams before decoding: incomplete event
    groups are removed wholesale, out-of-order positions and content
    outside a bar/position are skipped.
    """
    out: list[EventToken] = []
    pending: list[EventToken] = []
    expected: tuple[str, ...] | None = None
    bar_open = False
    position_open = False
    last_position: int | None = None
    dropped = 0

    for tok in tokens:
        if not vocab.is_valid(tok):
            dropped += 1
            continue
        cat, val = tok.category, tok.value
        if expected is not None:
            if cat in expected:
                pending.append(tok)
                nxt = _TRIPLE_NEXT.get(cat)
                if cat in (TEMPO, CHORD_SLASH, NOTE_DURATION):
                    out.extend(pending)
                    pending, expected = [], None
                else:
                    expected = nxt
                continue
            dropped += len(pending)
            pending, expected = [], None
            # fall through: retry this token at top level
        if cat == BAR:
            out.append(tok)
            bar_open = True
            position_open = False
            last_position = None
        elif cat == POSITION:
            if bar_open and (last_position is None or val > last_position):
                out.append(tok)
                position_open = True
                last_position = val
            else:
                dropped += 1
        elif cat in (PART_START, PART_END, REP_START, REP_END):
            if bar_open:
                out.append(tok)
            else:
                dropped += 1
        elif cat in _NEEDS_POSITION:
            if position_open:
                pending = [tok]
                expected = _TRIPLE_NEXT[cat]
            else:
                dropped += 1
        else:
            dropped += 1
    dropped += len(pending)
    return out, dropped
