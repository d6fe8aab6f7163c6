"""Small shared helpers: seed derivation and text tables."""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix_seed(seed: int, *salts: int) -> int:
    """Derive a child seed deterministically; stable across platforms."""
    h = seed & _MASK
    for s in salts:
        h = (h ^ (s & _MASK)) * _GOLDEN & _MASK
        h ^= h >> 29
    return h


def format_table(headers, rows) -> str:
    """Aligned plain-text table."""
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = []
    for r, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
