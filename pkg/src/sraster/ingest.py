"""CSV ingestion with timestamp-to-period mapping, and a synthetic hub generator.

Input rows are ``x,y,timestamp`` where the timestamp is either integer epoch
seconds or an RFC 3339 string. An optional header row starting with ``x`` is
skipped.
"""
from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Iterator, Optional, TextIO

import numpy as np

from .errors import ConfigError, ParseError
from .grid import GeoPoint
from .nodes import StreamRecord

_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class IngestConfig:
    period_length: float = 86400.0
    epoch: Optional[float] = None  # None: first record, aligned to a period boundary
    columns: tuple = ("x", "y", "timestamp")
    delimiter: str = ","

    def __post_init__(self):
        if not self.period_length > 0:
            raise ConfigError(f"period_length must be > 0, got {self.period_length!r}")
        if sorted(self.columns) != ["timestamp", "x", "y"]:
            raise ConfigError(f"columns must name x, y and timestamp, got {self.columns!r}")


def parse_timestamp(text: str) -> float:
    """Epoch seconds from integer seconds or an RFC 3339 timestamp."""
    text = text.strip()
    if _INT_RE.match(text):
        return float(int(text))
    iso = text[:-1] + "+00:00" if text[-1:] in "zZ" else text
    try:
        dt = datetime.fromisoformat(iso)
    except ValueError:
        raise ValueError(f"unrecognised timestamp {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def aligned_epoch(timestamp: float, period_length: float) -> float:
    return math.floor(timestamp / period_length) * period_length


def assign_period(timestamp: float, cfg: IngestConfig, epoch: Optional[float] = None) -> int:
    epoch = cfg.epoch if epoch is None else epoch
    if epoch is None:
        raise ConfigError("no epoch configured")
    if timestamp < epoch:
        raise ValueError(f"timestamp {timestamp} precedes epoch {epoch}")
    return math.floor((timestamp - epoch) / cfg.period_length)


def _rows(f: TextIO, delimiter: str):
    for line, row in enumerate(csv.reader(f, delimiter=delimiter), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if line == 1 and row[0].strip().lower() == "x":
            continue
        yield line, row


def read_stream(f: TextIO, cfg: IngestConfig = IngestConfig()) -> Iterator[StreamRecord]:
    """Yield records in file order; periods come from :func:`assign_period`."""
    ix, iy, it = (cfg.columns.index(c) for c in ("x", "y", "timestamp"))
    epoch = cfg.epoch
    for line, row in _rows(f, cfg.delimiter):
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line)
        try:
            x, y = float(row[ix]), float(row[iy])
            ts = parse_timestamp(row[it])
            if epoch is None:
                epoch = aligned_epoch(ts, cfg.period_length)
            period = assign_period(ts, cfg, epoch)
        except ValueError as exc:
            raise ParseError(str(exc), line) from None
        yield StreamRecord((x, y), period)


def read_points(f: TextIO, delimiter: str = ",") -> Iterator[GeoPoint]:
    """Points for batch mode: first two columns, any further columns ignored."""
    for line, row in _rows(f, delimiter):
        if len(row) < 2:
            raise ParseError(f"expected at least 2 fields, got {len(row)}", line)
        try:
            yield float(row[0]), float(row[1])
        except ValueError as exc:
            raise ParseError(str(exc), line) from None


@dataclass(frozen=True)
class Hub:
    center: tuple
    stddev: float
    points_per_period: int
    lifetime: tuple  # [start, end) in periods
    drift: tuple = (0.0, 0.0)

    def center_at(self, period: int) -> GeoPoint:
        k = period - self.lifetime[0]
        return self.center[0] + k * self.drift[0], self.center[1] + k * self.drift[1]

    def alive(self, period: int) -> bool:
        return self.lifetime[0] <= period < self.lifetime[1]


@dataclass(frozen=True)
class GeneratorSpec:
    """Evolving Gaussian hubs plus uniform noise.

    Sampling uses numpy's PCG64 generator (``numpy.random.default_rng``)
    seeded with ``seed``; draws happen period by period, hub by hub, then
    noise, then a within-period shuffle.
    """

    seed: int = 0
    hubs: tuple = ()
    noise_per_period: int = 0
    num_periods: int = 10
    bbox: tuple = (-180.0, 180.0, -90.0, 90.0)
    period_seconds: int = 86400
    epoch: int = 0

    def __post_init__(self):
        if self.num_periods < 0:
            raise ConfigError("num_periods: must be >= 0")
        if self.noise_per_period < 0:
            raise ConfigError("noise_per_period: must be >= 0")
        if self.period_seconds <= 0:
            raise ConfigError("period_seconds: must be > 0")
        xmin, xmax, ymin, ymax = self.bbox
        if not (xmin <= xmax and ymin <= ymax):
            raise ConfigError(f"bbox: invalid box {self.bbox!r}")
        for i, h in enumerate(self.hubs):
            if not h.stddev > 0:
                raise ConfigError(f"hubs[{i}].stddev: must be > 0")
            if h.points_per_period < 0:
                raise ConfigError(f"hubs[{i}].points_per_period: must be >= 0")
            start, end = h.lifetime
            if not 0 <= start <= end <= max(self.num_periods, 0):
                raise ConfigError(f"hubs[{i}].lifetime: must lie within [0, {self.num_periods})")

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")
        hubs = []
        for i, h in enumerate(d.get("hubs", [])):
            try:
                hubs.append(
                    Hub(
                        center=tuple(float(v) for v in h["center"]),
                        stddev=float(h["stddev"]),
                        points_per_period=int(h["points_per_period"]),
                        lifetime=tuple(int(v) for v in h["lifetime"]),
                        drift=tuple(float(v) for v in h.get("drift", (0.0, 0.0))),
                    )
                )
            except KeyError as exc:
                raise ConfigError(f"hubs[{i}].{exc.args[0]}: missing") from None
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"hubs[{i}]: {exc}") from None
        kw = {k: v for k, v in d.items() if k != "hubs"}
        if "bbox" in kw:
            kw["bbox"] = tuple(float(v) for v in kw["bbox"])
        return cls(hubs=tuple(hubs), **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hubs"] = [asdict(h) for h in self.hubs]
        return d


def ground_truth(spec: GeneratorSpec) -> list:
    """Per hub, its center for every period it is alive."""
    return [
        {
            "hub": i,
            "trajectory": [
                {"period": p, "x": h.center_at(p)[0], "y": h.center_at(p)[1]}
                for p in range(*h.lifetime)
            ],
        }
        for i, h in enumerate(spec.hubs)
    ]


def generate_periods(spec: GeneratorSpec) -> Iterator[tuple]:
    """Yield ``(period, xs, ys)`` numpy arrays, one period at a time."""
    rng = np.random.default_rng(spec.seed)
    xmin, xmax, ymin, ymax = spec.bbox
    for p in range(spec.num_periods):
        xs, ys = [], []
        for h in spec.hubs:
            if not h.alive(p) or h.points_per_period == 0:
                continue
            cx, cy = h.center_at(p)
            xs.append(rng.normal(cx, h.stddev, h.points_per_period))
            ys.append(rng.normal(cy, h.stddev, h.points_per_period))
        if spec.noise_per_period:
            xs.append(rng.uniform(xmin, xmax, spec.noise_per_period))
            ys.append(rng.uniform(ymin, ymax, spec.noise_per_period))
        if not xs:
            continue
        x = np.concatenate(xs)
        y = np.concatenate(ys)
        order = rng.permutation(len(x))
        yield p, np.clip(x[order], xmin, xmax), np.clip(y[order], ymin, ymax)


def generate(spec: GeneratorSpec) -> tuple:
    """Return ``(records, truth)``; records is a list of :class:`StreamRecord`."""
    records = [
        StreamRecord((x, y), p)
        for p, xs, ys in generate_periods(spec)
        for x, y in zip(xs.tolist(), ys.tolist())
    ]
    return records, ground_truth(spec)


def write_generated(spec: GeneratorSpec, out: TextIO, truth_out: TextIO) -> int:
    """Write ``x,y,timestamp`` rows and the JSON ground truth; return row count."""
    rng = np.random.default_rng([spec.seed, 1])
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["x", "y", "timestamp"])
    n = 0
    for p, xs, ys in generate_periods(spec):
        start = spec.epoch + p * spec.period_seconds
        offsets = np.sort(rng.integers(0, spec.period_seconds, len(xs)))
        for x, y, off in zip(xs.tolist(), ys.tolist(), offsets.tolist()):
            w.writerow([repr(x), repr(y), start + off])
            n += 1
    json.dump({"hubs": ground_truth(spec)}, truth_out, indent=2)
    truth_out.write("\n")
    return n


def load_generator_spec(path) -> GeneratorSpec:
    with open(path) as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return GeneratorSpec.from_dict(d)
