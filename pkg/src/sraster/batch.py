"""Single-pass batch RASTER and the point-retaining RASTER' variant.

``cluster_tiles`` is also the kernel the streaming clustering node calls
whenever a period closes.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .errors import ConfigError, RejectedInputError
from .grid import Metric, check_prec, neighbor_offsets, project


@dataclass(frozen=True)
class BatchParams:
    prec: int = 4
    tau: int = 5
    metric: Metric = field(default_factory=Metric)
    mu: int = 2

    def __post_init__(self):
        check_prec(self.prec)
        if not isinstance(self.tau, int) or self.tau < 1:
            raise ConfigError(f"tau must be an integer >= 1, got {self.tau!r}")
        if not isinstance(self.mu, int) or self.mu < 1:
            raise ConfigError(f"mu must be an integer >= 1, got {self.mu!r}")


def _project_indexed(p, i, prec, bounds):
    try:
        return project(p, prec, bounds)
    except RejectedInputError as exc:
        raise RejectedInputError(str(exc), index=i) from None
    except (TypeError, ValueError) as exc:
        raise RejectedInputError(f"malformed point {p!r}: {exc}", index=i) from None


def accumulate(points: Iterable, prec: int, bounds=None) -> dict:
    """Count how many points land on each tile. Consumes ``points`` once."""
    counts: dict = defaultdict(int)
    for i, p in enumerate(points):
        counts[_project_indexed(p, i, prec, bounds)] += 1
    return dict(counts)


def significant_tiles(counts: dict, tau: int) -> set:
    return {t for t, n in counts.items() if n >= tau}


def cluster_tiles(sigma, metric: Metric, mu: int) -> list:
    """Connected components of ``sigma`` with at least ``mu`` tiles.

    Seeds are taken in lexicographic tile order, so the returned list is
    ordered by each cluster's smallest tile.
    """
    offsets = neighbor_offsets(metric)
    unvisited = set(sigma)
    clusters = []
    for seed in sorted(unvisited):
        if seed not in unvisited:
            continue
        unvisited.discard(seed)
        cluster = {seed}
        stack = [seed]
        while stack:
            x, y = stack.pop()
            for dx, dy in offsets:
                n = (x + dx, y + dy)
                if n in unvisited:
                    unvisited.discard(n)
                    cluster.add(n)
                    stack.append(n)
        if len(cluster) >= mu:
            clusters.append(frozenset(cluster))
    return clusters


def raster(points: Iterable, params: BatchParams, bounds=None) -> list:
    counts = accumulate(points, params.prec, bounds)
    return cluster_tiles(significant_tiles(counts, params.tau), params.metric, params.mu)


def raster_prime(points: Iterable, params: BatchParams, bounds=None) -> list:
    """Like :func:`raster`, but every clustered tile keeps its input points.

    Returns a list of ``{tile: [points...]}`` dicts, one per cluster, in the
    same order as :func:`raster`. Duplicate points are kept with multiplicity.
    """
    retained: dict = defaultdict(list)
    for i, p in enumerate(points):
        retained[_project_indexed(p, i, params.prec, bounds)].append(p)
    sigma = {t for t, pts in retained.items() if len(pts) >= params.tau}
    return [
        {t: retained[t] for t in sorted(cluster)}
        for cluster in cluster_tiles(sigma, params.metric, params.mu)
    ]
