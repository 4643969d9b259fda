"""Bit-vector labels shared by the label LP and the CSP modules.

A label over k positions is an int in [0, 2^k); position i (0-based) maps
to bit (k-1-i), so the string form reads left to right in declared order.
"""

from __future__ import annotations


def label_bit(label: int, i: int, k: int) -> int:
    return (label >> (k - 1 - i)) & 1


def label_leq(a: int, b: int) -> bool:
    """Componentwise <= on bit vectors."""
    return a & ~b == 0


def label_str(label: int, k: int) -> str:
    return format(label, f"0{k}b") if k else ""


def label_from_str(text: str) -> int:
    return int(text, 2) if text else 0


def label_for_positions(positions, k: int) -> int:
    out = 0
    for i in positions:
        out |= 1 << (k - 1 - i)
    return out


def positions_for_label(label: int, k: int) -> frozenset[int]:
    return frozenset(i for i in range(k) if label_bit(label, i, k))


def concat_labels(first: int, second: int, second_width: int) -> int:
    """Concatenate bit vectors: `first` occupies the high bits."""
    return (first << second_width) | second


def split_label(label: int, first_width: int, second_width: int) -> tuple[int, int]:
    return label >> second_width, label & ((1 << second_width) - 1)
