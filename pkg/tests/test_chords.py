from __future__ import annotations

import pytest

from swingbench.chords import (
    CHORD_QUALITIES,
    ChordError,
    ChordSymbol,
    chord_pitch_classes,
    chord_to_pitches,
    format_chord,
    parse_chord,
    transpose_chord_string,
)


def test_quality_table_has_47_entries():
    assert len(CHORD_QUALITIES) == 47


def test_templates_start_at_zero_and_increase():
    for quality in CHORD_QUALITIES:
        assert quality.intervals[0] == 0
        assert list(quality.intervals) == sorted(set(quality.intervals))
        assert all(0 <= iv <= 21 for iv in quality.intervals)


def test_dominant_seventh_template():
    seventh = next(q for q in CHORD_QUALITIES if q.name == "7")
    assert seventh.intervals == (0, 4, 7, 10)


def test_parse_worked_example():
    c = parse_chord("C7/G")
    assert c.tone == 0
    assert c.quality.name == "7"
    assert c.slash == 7


def test_parse_slash_defaults_to_tone():
    c = parse_chord("Dm7")
    assert (c.tone, c.quality.name, c.slash) == (2, "m7", 2)


def test_parse_bad_root():
    with pytest.raises(ChordError, match="root"):
        parse_chord("H7")


def test_parse_unknown_quality_names_neighbours():
    with pytest.raises(ChordError, match="maj7"):
        parse_chord("Cmaj77")


def test_parse_empty():
    with pytest.raises(ChordError):
        parse_chord("")


@pytest.mark.parametrize(
    "symbol,tone,slash",
    [("C", 0, 0), ("F#m7", 6, 6), ("Bbmaj7", 10, 10), ("C6/9", 0, 0), ("A7/E", 9, 4), ("Ebm7/Db", 3, 1)],
)
def test_parse_assorted(symbol, tone, slash):
    c = parse_chord(symbol)
    assert (c.tone, c.slash) == (tone, slash)


def test_format_parse_roundtrip_all_qualities():
    for tone in range(12):
        for idx in range(len(CHORD_QUALITIES)):
            for slash in (tone, (tone + 5) % 12):
                chord = ChordSymbol(tone, idx, slash)
                assert parse_chord(format_chord(chord)) == chord


def test_transpose_string_example():
    assert transpose_chord_string("C7/G", 2) == "D7/A"


def test_transpose_roundtrip():
    for symbol in ("C7/G", "Dm7", "F#maj7#11", "Bb13/D"):
        for k in range(-3, 4):
            assert parse_chord(transpose_chord_string(transpose_chord_string(symbol, k), -k)) == parse_chord(symbol)


def test_chord_to_pitches_root_position():
    assert chord_to_pitches(parse_chord("C7"), register=60) == [48, 60, 64, 67, 70]


def test_chord_to_pitches_slash_changes_bass_only():
    assert chord_to_pitches(parse_chord("C7/G"), register=60) == [55, 60, 64, 67, 70]


def test_chord_to_pitches_register_overflow():
    with pytest.raises(ChordError):
        chord_to_pitches(parse_chord("C13"), register=120)


def test_bad_type_index_rejected():
    with pytest.raises(ChordError):
        ChordSymbol(0, 47, 0)


def test_pitch_classes_include_slash():
    assert chord_pitch_classes(parse_chord("C7/A")) == {0, 4, 7, 10, 9}
