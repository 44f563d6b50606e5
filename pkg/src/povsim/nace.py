"""NACE Rev. 2 industry codes used for shock cells.

The engine works with 89 two-digit activity codes: the 88 official
divisions plus "00" for activity not stated, which some labour-survey
tables carry as its own row. One-digit aggregation uses the 21 official
sections A..U; code "00" maps to no section.
"""

from __future__ import annotations

_SECTION_RANGES: tuple[tuple[str, int, int], ...] = (
    ("A", 1, 3),
    ("B", 5, 9),
    ("C", 10, 33),
    ("D", 35, 35),
    ("E", 36, 39),
    ("F", 41, 43),
    ("G", 45, 47),
    ("H", 49, 53),
    ("I", 55, 56),
    ("J", 58, 63),
    ("K", 64, 66),
    ("L", 68, 68),
    ("M", 69, 75),
    ("N", 77, 82),
    ("O", 84, 84),
    ("P", 85, 85),
    ("Q", 86, 88),
    ("R", 90, 93),
    ("S", 94, 96),
    ("T", 97, 98),
    ("U", 99, 99),
)

SECTIONS: tuple[str, ...] = tuple(s for s, _, _ in _SECTION_RANGES)

UNKNOWN_DIVISION = "00"

DIVISIONS: tuple[str, ...] = (UNKNOWN_DIVISION,) + tuple(
    f"{code:02d}"
    for _, lo, hi in _SECTION_RANGES
    for code in range(lo, hi + 1)
)

_DIVISION_TO_SECTION: dict[str, str] = {
    f"{code:02d}": section
    for section, lo, hi in _SECTION_RANGES
    for code in range(lo, hi + 1)
}


def is_division(code: str) -> bool:
    return code in _DIVISION_TO_SECTION or code == UNKNOWN_DIVISION


def section_of(division: str) -> str | None:
    """Section letter for a two-digit division; None for "00" (not stated)."""
    return _DIVISION_TO_SECTION.get(division)
