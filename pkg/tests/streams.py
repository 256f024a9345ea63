"""Seeded random streams shared by the property and acceptance tests."""
import numpy as np

from sraster import StreamRecord, project


def random_stream(seed, n_records=10_000, n_periods=10, prec=4, max_gap=2, span=40):
    """Clustered points on a ``span`` x ``span`` tile patch, periods non-decreasing.

    Period ids are ``n_periods`` distinct values with gaps of up to ``max_gap``;
    hubs come and go between periods so tiles gain and lose significance.
    """
    rng = np.random.default_rng(seed)
    cell = 10.0 ** -prec
    origin = rng.uniform(-10, 10, 2)
    steps = rng.integers(1, max_gap + 1, n_periods)
    steps[0] = rng.integers(0, 3)
    periods = np.cumsum(steps)
    sizes = rng.multinomial(n_records, np.full(n_periods, 1.0 / n_periods))
    hubs = rng.uniform(0.2 * span, 0.8 * span, (6, 2)) * cell
    recs = []
    for p, k in zip(periods.tolist(), sizes.tolist()):
        live = hubs[rng.random(len(hubs)) < 0.6]
        n_noise = k // 3 if len(live) else k
        pts = [rng.uniform(0, span * cell, (n_noise, 2))]
        if len(live):
            centers = live[rng.integers(0, len(live), k - n_noise)]
            pts.append(centers + rng.normal(0, 2.5 * cell, (k - n_noise, 2)))
        xy = origin + np.concatenate(pts)
        rng.shuffle(xy)
        recs.extend(StreamRecord((x, y), p) for x, y in xy.tolist())
    return recs


def window_log(records, prec, prime=False):
    """What the accumulation stage sees: ``(tile, period, point)`` per valid record."""
    return [(project(r.point, prec), r.period, r.point) for r in records if r.point is not None]


class CountingIter:
    """Iterator wrapper that records how often each element was handed out."""

    def __init__(self, items):
        self._items = items
        self.served = [0] * len(items)
        self.exhausted = 0

    def __iter__(self):
        for i, item in enumerate(self._items):
            self.served[i] += 1
            yield item
        self.exhausted += 1
