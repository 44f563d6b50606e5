"""NACE Rev. 2 code tables: 89 divisions, 21 sections, exact boundaries."""

from __future__ import annotations

import pytest

from povsim.nace import (
    DIVISIONS,
    SECTIONS,
    UNKNOWN_DIVISION,
    is_division,
    section_of,
)


def test_counts():
    assert len(SECTIONS) == 21
    assert len(DIVISIONS) == 89          # 88 official divisions + "00"
    assert len(set(DIVISIONS)) == 89


def test_sections_are_a_through_u():
    assert SECTIONS == tuple("ABCDEFGHIJKLMNOPQRSTU")


def test_unknown_division():
    assert UNKNOWN_DIVISION == "00"
    assert is_division("00")
    assert section_of("00") is None


@pytest.mark.parametrize("division,section", [
    ("01", "A"), ("03", "A"),
    ("05", "B"), ("09", "B"),
    ("10", "C"), ("33", "C"),
    ("35", "D"),
    ("36", "E"), ("39", "E"),
    ("41", "F"), ("43", "F"),
    ("45", "G"), ("47", "G"),
    ("49", "H"), ("53", "H"),
    ("55", "I"), ("56", "I"),
    ("58", "J"), ("63", "J"),
    ("64", "K"), ("66", "K"),
    ("68", "L"),
    ("69", "M"), ("75", "M"),
    ("77", "N"), ("82", "N"),
    ("84", "O"),
    ("85", "P"),
    ("86", "Q"), ("88", "Q"),
    ("90", "R"), ("93", "R"),
    ("94", "S"), ("96", "S"),
    ("97", "T"), ("98", "T"),
    ("99", "U"),
])
def test_section_boundaries(division, section):
    assert is_division(division)
    assert section_of(division) == section


@pytest.mark.parametrize("code", ["04", "34", "40", "44", "48", "54", "57",
                                  "67", "76", "83", "89", "1", "100", "AA", ""])
def test_gaps_and_malformed_codes_are_not_divisions(code):
    assert not is_division(code)
    assert section_of(code) is None


def test_every_division_but_unknown_has_a_section():
    for code in DIVISIONS:
        if code == UNKNOWN_DIVISION:
            continue
        assert section_of(code) in SECTIONS


def test_divisions_sorted_and_zero_padded():
    assert all(len(code) == 2 for code in DIVISIONS)
    assert list(DIVISIONS) == sorted(DIVISIONS)
