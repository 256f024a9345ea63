"""Threaded source -> projection -> accumulation -> clustering -> sink pipeline.

Stages talk only through bounded FIFO channels. Records travel in chunks:
the source hands chunk ``k`` to projection worker ``k % num_pi``; every
projection worker forwards one (possibly empty) sub-chunk per accumulation
partition for each chunk it receives, and each accumulation worker reads its
projection inputs in the same round-robin order. Every partition therefore
sees exactly the source order restricted to its own tiles, no matter how
many workers run.

The source also injects a period tick into every partition whenever the
global period changes, so all partitions walk through the same sequence of
periods. The clustering node aligns partitions with a min-watermark barrier:
period ``p`` is clustered once every partition has announced the end of
``p``.
"""
from __future__ import annotations

import logging
import queue
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .batch import BatchParams
from .errors import ConfigError, PipelineError, ProtocolError, RejectedInputError
from .grid import DEFAULT_BOUNDS, Bounds, Tile, project
from .nodes import AlphaNode, KappaNode, Recluster, StreamRecord

log = logging.getLogger(__name__)

LATE_DROP = "drop"
LATE_DELAY = "delay"

_MASK = (1 << 64) - 1
_EOS = object()


@dataclass(frozen=True)
class PipelineConfig:
    params: BatchParams = field(default_factory=BatchParams)
    window: int = 3
    num_pi: int = 1
    num_alpha: int = 1
    prime: bool = False
    late_policy: str = LATE_DROP
    channel_capacity: int = 16
    chunk_size: int = 1024
    bounds: Optional[Bounds] = DEFAULT_BOUNDS

    def __post_init__(self):
        for name in ("window", "num_pi", "num_alpha", "channel_capacity", "chunk_size"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
        if self.late_policy not in (LATE_DROP, LATE_DELAY):
            raise ConfigError(f"late_policy must be 'drop' or 'delay', got {self.late_policy!r}")


@dataclass
class PipelineStats:
    records: int = 0
    late_dropped: int = 0
    invalid_dropped: int = 0
    periods_emitted: int = 0
    peak_buffered: int = 0
    alignment_peak: int = 0


def partition_key(tile: Tile, n: int) -> int:
    """Stable partition index in ``[0, n)``; same across runs and processes."""
    if n == 1:
        return 0
    h = (tile[0] * 0x9E3779B97F4A7C15 + tile[1] * 0xC2B2AE3D27D4EB4F) & _MASK
    h ^= h >> 33
    h = (h * 0xFF51AFD7ED558CCD) & _MASK
    h ^= h >> 33
    return h % n


class BarrierState:
    """Min-watermark over the period announcements of ``n`` partitions."""

    def __init__(self, n: int):
        self.announced: list = [None] * n
        self.last_clustered: Optional[int] = None

    def advance(self, alpha_id: int, period: int) -> Optional[int]:
        """Record ``Recluster(period)`` from a partition; return a period to cluster, if any."""
        prev = self.announced[alpha_id]
        if prev is not None and period < prev:
            raise ProtocolError(f"partition {alpha_id} regressed from period {prev} to {period}")
        self.announced[alpha_id] = period
        if any(a is None for a in self.announced):
            return None
        low = min(self.announced)
        if self.last_clustered is None or low > self.last_clustered:
            self.last_clustered = low
            return low
        return None


def order_records(source: Iterable, policy: str, stats: PipelineStats) -> Iterator[StreamRecord]:
    """Filter or reorder the source so periods never decrease.

    ``drop`` discards records older than the highest period seen so far.
    ``delay`` holds records back by one period and sorts them, so records up
    to one period late are still counted.
    """
    top = None
    if policy == LATE_DROP:
        for rec in source:
            stats.records += 1
            if top is not None and rec.period < top:
                stats.late_dropped += 1
                continue
            top = rec.period
            yield rec
        return

    held: dict = {}
    for rec in source:
        stats.records += 1
        if top is not None and rec.period < top - 1:
            stats.late_dropped += 1
            continue
        held.setdefault(rec.period, []).append(rec)
        if top is None or rec.period > top:
            top = rec.period
            for p in sorted(q for q in held if q < top - 1):
                yield from held.pop(p)
    for p in sorted(held):
        yield from held[p]


class _Aborted(Exception):
    pass


class Channel:
    """Bounded FIFO queue that gives up when the pipeline aborts."""

    def __init__(self, capacity: int, abort: threading.Event):
        self._q: queue.Queue = queue.Queue(capacity)
        self._abort = abort
        self.peak = 0

    def put(self, item) -> None:
        while True:
            try:
                self._q.put(item, timeout=0.05)
                break
            except queue.Full:
                if self._abort.is_set():
                    raise _Aborted from None
        n = self._q.qsize()
        if n > self.peak:
            self.peak = n

    def get(self):
        while True:
            try:
                return self._q.get(timeout=0.05)
            except queue.Empty:
                if self._abort.is_set():
                    raise _Aborted from None


class Pipeline:
    """One run of the streaming clusterer. Not reusable; build a new one per source."""

    def __init__(self, cfg: PipelineConfig, on_cluster=None):
        self.cfg = cfg
        self.stats = PipelineStats()
        self.alphas = [AlphaNode(cfg.window, cfg.params.tau, cfg.prime) for _ in range(cfg.num_alpha)]
        self.kappa = KappaNode(cfg.params, cfg.prime, on_cluster)
        self._invalid = [0] * cfg.num_pi
        self._abort = threading.Event()
        self._failure = None
        self._lock = threading.Lock()
        self._started = False
        cap = cfg.channel_capacity
        self._pi_in = [Channel(cap, self._abort) for _ in range(cfg.num_pi)]
        self._pi_out = [[Channel(cap, self._abort) for _ in range(cfg.num_alpha)] for _ in range(cfg.num_pi)]
        self._to_kappa = Channel(cap, self._abort)
        self._sink = Channel(cap, self._abort)

    def channels(self) -> list:
        return [*self._pi_in, *(c for row in self._pi_out for c in row), self._to_kappa, self._sink]

    def _source(self, source):
        cfg = self.cfg
        chunk: list = []
        k = 0
        last = None
        for rec in order_records(source, cfg.late_policy, self.stats):
            if rec.period != last:
                chunk.append(StreamRecord(None, rec.period))
                last = rec.period
            if rec.point is not None:
                chunk.append(rec)
            if len(chunk) >= cfg.chunk_size:
                self._pi_in[k % cfg.num_pi].put(chunk)
                k += 1
                chunk = []
        if chunk:
            self._pi_in[k % cfg.num_pi].put(chunk)
        for ch in self._pi_in:
            ch.put(_EOS)

    def _project(self, i: int):
        cfg = self.cfg
        prec, bounds, prime, n = cfg.params.prec, cfg.bounds, cfg.prime, cfg.num_alpha
        inq, outs = self._pi_in[i], self._pi_out[i]
        while True:
            chunk = inq.get()
            if chunk is _EOS:
                for ch in outs:
                    ch.put(_EOS)
                return
            parts: list = [[] for _ in range(n)]
            for point, period in chunk:
                if point is None:
                    for part in parts:
                        part.append((None, period, None))
                    continue
                try:
                    tile = project(point, prec, bounds)
                except (RejectedInputError, TypeError, ValueError):
                    self._invalid[i] += 1
                    continue
                parts[partition_key(tile, n)].append((tile, period, point if prime else None))
            for ch, part in zip(outs, parts):
                ch.put(part)

    def _accumulate(self, a: int):
        cfg = self.cfg
        node = self.alphas[a]
        inputs = [row[a] for row in self._pi_out]
        out = self._to_kappa
        k = 0
        while True:
            msg = inputs[k % cfg.num_pi].get()
            if msg is _EOS:
                # every projection worker sends its end marker at the same position
                for j in range(1, cfg.num_pi):
                    inputs[(k + j) % cfg.num_pi].get()
                break
            k += 1
            ups: list = []
            for tile, period, point in msg:
                if tile is None:
                    ups.extend(node.advance_to(period))
                elif cfg.prime:
                    ups.extend(node.process_point(tile, period, point))
                else:
                    r = node.process(tile, period)
                    if r:
                        ups.extend(r)
            if ups:
                out.put((a, ups))
        out.put((a, node.flush()))
        out.put((a, _EOS))

    def _cluster(self):
        n = self.cfg.num_alpha
        kappa = self.kappa
        barrier = BarrierState(n)
        pending = [deque() for _ in range(n)]
        blocked = [False] * n
        done = 0
        while done < n:
            a, msg = self._to_kappa.get()
            if msg is _EOS:
                done += 1
                continue
            pending[a].extend(msg)
            buffered = sum(map(len, pending))
            if buffered > self.stats.alignment_peak:
                self.stats.alignment_peak = buffered
            progress = True
            while progress:
                progress = False
                for b in range(n):
                    q = pending[b]
                    while q and not blocked[b]:
                        u = q.popleft()
                        progress = True
                        if not isinstance(u, Recluster):
                            kappa.apply(u)
                            continue
                        prev = barrier.announced[b]
                        if prev is not None and u.period == prev:
                            continue  # repeated flush
                        blocked[b] = True
                        p = barrier.advance(b, u.period)
                        if p is not None:
                            self._sink.put((p, kappa.recluster(p)))
                            blocked = [False] * n
        leftover = sum(map(len, pending))
        if leftover:
            raise ProtocolError(f"{leftover} updates left unaligned at end of stream")
        self._sink.put(_EOS)

    def _spawn(self, name, fn, *args):
        def body():
            try:
                fn(*args)
            except _Aborted:
                pass
            except BaseException as exc:  # noqa: BLE001 - reported to the sink
                with self._lock:
                    if self._failure is None:
                        self._failure = (name, exc)
                self._abort.set()

        t = threading.Thread(target=body, name=f"sraster-{name}", daemon=True)
        t.start()
        return t

    def periods(self, source: Iterable) -> Iterator[tuple]:
        """Run the pipeline, yielding ``(period, rows)`` as each period is clustered."""
        if self._started:
            raise RuntimeError("a Pipeline instance runs only once")
        self._started = True
        threads = [self._spawn("source", self._source, source)]
        threads += [self._spawn(f"pi[{i}]", self._project, i) for i in range(self.cfg.num_pi)]
        threads += [self._spawn(f"alpha[{a}]", self._accumulate, a) for a in range(self.cfg.num_alpha)]
        threads.append(self._spawn("kappa", self._cluster))
        try:
            while True:
                try:
                    item = self._sink.get()
                except _Aborted:
                    name, exc = self._failure
                    raise PipelineError(name, exc) from exc
                if item is _EOS:
                    break
                self.stats.periods_emitted += 1
                yield item
        finally:
            # early close by the consumer, or a failed stage: stop the rest
            if any(t.is_alive() for t in threads):
                self._abort.set()
            for t in threads:
                t.join()
            self.stats.invalid_dropped = sum(self._invalid)
            self.stats.peak_buffered = sum(c.peak for c in self.channels())
        log.debug("pipeline finished: %s", self.stats)

    def run(self, source: Iterable) -> Iterator:
        for _, rows in self.periods(source):
            yield from rows


def run_pipeline(cfg: PipelineConfig, source: Iterable) -> Iterator:
    return Pipeline(cfg).run(source)
