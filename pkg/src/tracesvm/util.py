"""Small shared helpers."""

from __future__ import annotations

import math


def round_half_up(x: float) -> int:
    """Round to the nearest integer with .5 going up (47.5 -> 48)."""
    return int(math.floor(x + 0.5))
