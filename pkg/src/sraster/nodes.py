"""Projection, accumulation and clustering nodes as message-driven state machines.

The accumulation node turns a stream of ``(tile, period)`` inputs into
significance updates; the clustering node folds those updates into the set of
significant tiles and clusters it whenever a period closes.

Update messages:

* ``Add(tile)``        tile just reached the threshold (flag 1)
* ``Remove(tile)``     tile fell below the threshold (flag -1)
* ``Recluster(p)``     period ``p`` is complete at the sender (flag 0)

Point-retaining mode adds ``Forward`` (new points for an already significant
tile) and ``Expire`` (the oldest points of a still-significant tile left the
window), and ``Add`` carries the tile's retained points.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .batch import BatchParams, cluster_tiles
from .errors import ConfigError, ConsistencyError, LateRecordError
from .grid import GeoPoint, Tile, project, rescale


@dataclass(frozen=True, slots=True)
class Add:
    tile: Tile
    points: Optional[tuple] = None


@dataclass(frozen=True, slots=True)
class Remove:
    tile: Tile


@dataclass(frozen=True, slots=True)
class Recluster:
    period: int


@dataclass(frozen=True, slots=True)
class Forward:
    tile: Tile
    points: tuple


@dataclass(frozen=True, slots=True)
class Expire:
    tile: Tile
    count: int


class StreamRecord(NamedTuple):
    """A point observed in ``period``. ``point=None`` marks a bare period tick."""

    point: Optional[GeoPoint]
    period: int


class ClusterRow(NamedTuple):
    period: Optional[int]
    cluster_id: int
    xr: float
    yr: float
    x: Optional[float] = None
    y: Optional[float] = None
    tile: Optional[Tile] = None


def project_record(rec: StreamRecord, prec: int, prime: bool = False, bounds=None):
    """Projection node: ``(point, period) -> (tile, period[, point])``."""
    tile = project(rec.point, prec, bounds)
    if prime:
        return tile, rec.period, rec.point
    return tile, rec.period


class AlphaNode:
    """Sliding-window tile counter for one partition of the tile space.

    ``window`` maps period -> {tile: count} (or {tile: [points]} when
    ``prime``); ``totals`` holds the per-tile sum over the window. Only the
    ``window_len`` most recent periods are kept.
    """

    def __init__(self, window_len: int, tau: int, prime: bool = False):
        if window_len < 1:
            raise ConfigError(f"window length must be >= 1, got {window_len}")
        if tau < 1:
            raise ConfigError(f"tau must be >= 1, got {tau}")
        self.window_len = window_len
        self.tau = tau
        self.prime = prime
        self.totals: dict = {}
        self.window: dict = {}
        self.current: Optional[int] = None

    def advance_to(self, period: int) -> list:
        """Move the window forward to ``period``, one period at a time."""
        out: list = []
        if self.current is None:
            self.current = period
            return out
        if period < self.current:
            raise LateRecordError(f"period {period} is before current period {self.current}")
        if period == self.current:
            return out
        out.append(Recluster(self.current))
        while True:
            self.current += 1
            self._prune(self.current - self.window_len, out)
            if self.current == period:
                return out
            # interpolated empty period
            out.append(Recluster(self.current))

    def _prune(self, key: int, out: list) -> None:
        vals = self.window.pop(key, None)
        if not vals:
            return
        tau = self.tau
        totals = self.totals
        for tile, v in vals.items():
            k = len(v) if self.prime else v
            old = totals[tile]
            new = old - k
            if old >= tau > new:
                out.append(Remove(tile))
            elif self.prime and new >= tau:
                out.append(Expire(tile, k))
            if new == 0:
                del totals[tile]
            else:
                totals[tile] = new

    def process(self, tile: Tile, period: int) -> list:
        out = self.advance_to(period) if period != self.current else []
        w = self.window.get(period)
        if w is None:
            w = self.window[period] = {}
        w[tile] = w.get(tile, 0) + 1
        n = self.totals.get(tile, 0) + 1
        self.totals[tile] = n
        if n == self.tau:
            out.append(Add(tile))
        return out

    def process_point(self, tile: Tile, period: int, point: GeoPoint) -> list:
        out = self.advance_to(period) if period != self.current else []
        w = self.window.get(period)
        if w is None:
            w = self.window[period] = {}
        w.setdefault(tile, []).append(point)
        n = self.totals.get(tile, 0) + 1
        self.totals[tile] = n
        if n == self.tau:
            out.append(Add(tile, tuple(self.points_for(tile))))
        elif n > self.tau:
            out.append(Forward(tile, (point,)))
        return out

    def points_for(self, tile: Tile) -> list:
        """Retained points of ``tile``, oldest period first."""
        pts: list = []
        for p in sorted(self.window):
            pts.extend(self.window[p].get(tile, ()))
        return pts

    def flush(self) -> list:
        return [] if self.current is None else [Recluster(self.current)]

    def significant(self) -> set:
        return {t for t, n in self.totals.items() if n >= self.tau}

    def window_entries(self) -> int:
        return sum(len(w) for w in self.window.values())

    def audit(self) -> None:
        """Raise AssertionError if the count bookkeeping is inconsistent."""
        recount: dict = {}
        for p, w in self.window.items():
            assert self.current - self.window_len < p <= self.current, (p, self.current)
            for t, v in w.items():
                k = len(v) if self.prime else v
                assert k > 0, (p, t)
                recount[t] = recount.get(t, 0) + k
        assert recount == self.totals
        assert len(self.window) <= self.window_len


class KappaNode:
    """Holds the significant tiles reported by all partitions and clusters them."""

    def __init__(self, params: BatchParams, prime: bool = False, on_cluster=None):
        self.params = params
        self.prime = prime
        self.sigma = {} if prime else set()
        self.on_cluster = on_cluster

    def apply(self, u) -> list:
        sigma = self.sigma
        if isinstance(u, Recluster):
            return self.recluster(u.period)
        if isinstance(u, Add):
            if u.tile in sigma:
                raise ConsistencyError(f"Add for tile {u.tile} already significant")
            if self.prime:
                sigma[u.tile] = deque(u.points or ())
            else:
                sigma.add(u.tile)
        elif isinstance(u, Remove):
            if u.tile not in sigma:
                raise ConsistencyError(f"Remove for tile {u.tile} that is not significant")
            if self.prime:
                del sigma[u.tile]
            else:
                sigma.discard(u.tile)
        elif isinstance(u, Forward):
            if u.tile not in sigma:
                raise ConsistencyError(f"points forwarded for non-significant tile {u.tile}")
            sigma[u.tile].extend(u.points)
        elif isinstance(u, Expire):
            pts = sigma.get(u.tile)
            if pts is None or len(pts) < u.count:
                raise ConsistencyError(f"cannot expire {u.count} points of tile {u.tile}")
            for _ in range(u.count):
                pts.popleft()
        else:
            raise TypeError(f"unknown update {u!r}")
        return []

    def recluster(self, period: int) -> list:
        prm = self.params
        clusters = cluster_tiles(self.sigma, prm.metric, prm.mu)
        if self.on_cluster is not None:
            self.on_cluster(period, set(self.sigma), clusters)
        return cluster_rows(clusters, prm.prec, period, self.sigma if self.prime else None)


def cluster_rows(clusters, prec: int, period=None, points=None) -> list:
    """One row per tile (or per retained point) in cluster-id, tile order."""
    rows = []
    for cid, cluster in enumerate(clusters):
        for tile in sorted(cluster):
            xr, yr = rescale(tile, prec)
            if points is None:
                rows.append(ClusterRow(period, cid, xr, yr, tile=tile))
            else:
                for x, y in points[tile]:
                    rows.append(ClusterRow(period, cid, xr, yr, x, y, tile))
    return rows
