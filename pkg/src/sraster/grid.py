"""Decimal grid: projection of coordinates onto integer tiles and back.

Tiles are ``(xp, yp)`` integer pairs obtained by scaling a coordinate by
``10**prec`` and flooring. Floor rather than truncation keeps every cell the
same width on both sides of zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

from .errors import ConfigError, RejectedInputError

GeoPoint = Tuple[float, float]
Tile = Tuple[int, int]
Bounds = Tuple[float, float, float, float]

MAX_PREC = 15
_INT64 = 2.0 ** 63
# longitude x latitude
DEFAULT_BOUNDS: Bounds = (-180.0, 180.0, -90.0, 90.0)

CHEBYSHEV = "chebyshev"
MANHATTAN = "manhattan"


@dataclass(frozen=True)
class Metric:
    kind: str = CHEBYSHEV
    delta: int = 1

    def __post_init__(self):
        if self.kind not in (CHEBYSHEV, MANHATTAN):
            raise ConfigError(f"unknown metric {self.kind!r}")
        if not isinstance(self.delta, int) or self.delta < 1:
            raise ConfigError(f"delta must be an integer >= 1, got {self.delta!r}")

    def distance(self, a: Tile, b: Tile) -> int:
        dx = abs(a[0] - b[0])
        dy = abs(a[1] - b[1])
        return max(dx, dy) if self.kind == CHEBYSHEV else dx + dy


def check_prec(prec: int) -> int:
    if not isinstance(prec, int) or not 0 <= prec <= MAX_PREC:
        raise ConfigError(f"prec must be an integer in [0, {MAX_PREC}], got {prec!r}")
    return prec


def project(p: GeoPoint, prec: int, bounds: Optional[Bounds] = None) -> Tile:
    """Floor ``p * 10**prec`` per axis.

    ``bounds`` is ``(xmin, xmax, ymin, ymax)``; ``None`` only rejects values
    that are non-finite or would not fit a 64-bit tile index.
    """
    x, y = p
    if not (math.isfinite(x) and math.isfinite(y)):
        raise RejectedInputError(f"non-finite coordinate {p!r}")
    scale = 10 ** prec
    if bounds is not None:
        xmin, xmax, ymin, ymax = bounds
        if not (xmin <= x <= xmax and ymin <= y <= ymax):
            raise RejectedInputError(f"coordinate {p!r} outside bounds {bounds!r}")
    elif abs(x) * scale >= _INT64 or abs(y) * scale >= _INT64:
        raise RejectedInputError(f"coordinate {p!r} overflows the grid at prec={prec}")
    return math.floor(x * scale), math.floor(y * scale)


def rescale(t: Tile, prec: int) -> GeoPoint:
    scale = 10 ** prec
    return t[0] / scale, t[1] / scale


@lru_cache(maxsize=None)
def neighbor_offsets(metric: Metric) -> tuple:
    d = metric.delta
    offsets = []
    for dx in range(-d, d + 1):
        # Manhattan: |dx| + |dy| <= d
        span = d if metric.kind == CHEBYSHEV else d - abs(dx)
        for dy in range(-span, span + 1):
            if dx or dy:
                offsets.append((dx, dy))
    return tuple(offsets)


def neighbor_count(metric: Metric) -> int:
    d = metric.delta
    if metric.kind == CHEBYSHEV:
        return (2 * d + 1) ** 2 - 1
    return 2 * d * (d + 1)


def neighbors(t: Tile, metric: Metric) -> set:
    x, y = t
    return {(x + dx, y + dy) for dx, dy in neighbor_offsets(metric)}
