"""Command-line front end: ``sraster batch|stream|generate``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from contextlib import ExitStack
from typing import Iterable, Optional

from .batch import BatchParams, raster, raster_prime
from .errors import ConfigError, ParseError, PipelineError, RejectedInputError, SRasterError
from .grid import DEFAULT_BOUNDS, Metric
from .ingest import IngestConfig, load_generator_spec, parse_timestamp, read_points, read_stream, write_generated
from .nodes import ClusterRow, cluster_rows
from .pipeline import LATE_DELAY, LATE_DROP, Pipeline, PipelineConfig

log = logging.getLogger("sraster")

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def header(streaming: bool, prime: bool) -> list:
    cols = ["period"] if streaming else []
    cols += ["cluster_id", "xr", "yr"]
    if prime:
        cols += ["x", "y"]
    return cols


def format_row(row: ClusterRow, prec: int, streaming: bool, prime: bool) -> list:
    out = [str(row.period)] if streaming else []
    out += [str(row.cluster_id), f"{row.xr:.{prec}f}", f"{row.yr:.{prec}f}"]
    if prime:
        out += [repr(row.x), repr(row.y)]
    return out


def parse_output(f) -> list:
    """Read a CSV written by ``batch`` or ``stream`` back into ClusterRows."""
    reader = csv.reader(f)
    cols = next(reader, None)
    if cols is None:
        return []
    rows = []
    for rec in reader:
        d = dict(zip(cols, rec))
        rows.append(
            ClusterRow(
                int(d["period"]) if "period" in d else None,
                int(d["cluster_id"]),
                float(d["xr"]),
                float(d["yr"]),
                float(d["x"]) if "x" in d else None,
                float(d["y"]) if "y" in d else None,
            )
        )
    return rows


def geojson(rows: Iterable[ClusterRow], streaming: bool) -> dict:
    """One MultiPoint feature per (period, cluster) with the rescaled tile coordinates."""
    groups: dict = {}
    for r in rows:
        coords = groups.setdefault((r.period, r.cluster_id), {})
        coords[(r.xr, r.yr)] = None
    features = []
    for (period, cid), coords in groups.items():
        props = {"period": period} if streaming else {}
        props.update(cluster_id=cid, tile_count=len(coords))
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "MultiPoint", "coordinates": [list(c) for c in coords]},
                "properties": props,
            }
        )
    return {"type": "FeatureCollection", "features": features}


def _add_cluster_args(p):
    p.add_argument("--prec", type=int, default=4, help="decimal digits kept by the projection (default: 4)")
    p.add_argument("--tau", type=int, default=5, help="points needed for a significant tile (default: 5)")
    p.add_argument("--delta", type=int, default=1, help="neighborhood radius in tiles (default: 1)")
    p.add_argument("--mu", type=int, default=2, help="minimum tiles per cluster (default: 2)")
    p.add_argument("--metric", choices=["chebyshev", "manhattan"], default="chebyshev", help="tile distance (default: chebyshev)")
    p.add_argument("--retain-points", action="store_true", help="emit one row per clustered input point")
    p.add_argument("--format", choices=["csv", "geojson"], default="csv", help="output format (default: csv)")
    p.add_argument("--no-bounds", action="store_true", help="accept coordinates outside [-180,180]x[-90,90]")
    p.add_argument("-o", "--output", default="-", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sraster", description="Contraction clustering of point batches and evolving streams.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("batch", help="cluster a CSV of x,y points in one pass")
    b.add_argument("input", help="CSV with x,y[,...] rows, or - for stdin")
    _add_cluster_args(b)

    s = sub.add_parser("stream", help="cluster a timestamped x,y,timestamp stream over a sliding window")
    s.add_argument("input", nargs="?", default="-", help="CSV file, or - for stdin (default)")
    _add_cluster_args(s)
    s.add_argument("--window", type=int, default=3, help="sliding window length in periods (default: 3)")
    s.add_argument("--period-seconds", type=float, default=86400.0, help="period length in seconds (default: 86400)")
    s.add_argument("--epoch", default=None, help="start of period 0 (default: first record, aligned to a period boundary)")
    s.add_argument("--alpha", type=int, default=1, help="accumulation partitions (default: 1)")
    s.add_argument("--pi", type=int, default=1, help="projection workers (default: 1)")
    s.add_argument("--late-policy", choices=[LATE_DROP, LATE_DELAY], default=LATE_DROP, help="out-of-order records (default: drop)")
    s.add_argument("--capacity", type=int, default=16, help="bounded channel capacity in chunks (default: 16)")

    g = sub.add_parser("generate", help="write a synthetic hub stream from a JSON spec")
    g.add_argument("spec", help="generator spec (JSON)")
    g.add_argument("-o", "--output", required=True, help="CSV output path")
    g.add_argument("--truth", default=None, help="ground-truth JSON path (default: OUTPUT with .truth.json)")
    return parser


def _params(args) -> BatchParams:
    return BatchParams(args.prec, args.tau, Metric(args.metric, args.delta), args.mu)


def _bounds(args):
    return None if args.no_bounds else DEFAULT_BOUNDS


def _open_in(path, stack):
    return sys.stdin if path == "-" else stack.enter_context(open(path, newline=""))


def _open_out(path, stack):
    return sys.stdout if path == "-" else stack.enter_context(open(path, "w", newline=""))


def cmd_batch(args) -> int:
    params = _params(args)
    with ExitStack() as stack:
        points = read_points(_open_in(args.input, stack))
        if args.retain_points:
            clusters = raster_prime(points, params, _bounds(args))
            rows = cluster_rows(clusters, params.prec, None, {t: pts for c in clusters for t, pts in c.items()})
        else:
            rows = cluster_rows(raster(points, params, _bounds(args)), params.prec)
        out = _open_out(args.output, stack)
        if args.format == "geojson":
            json.dump(geojson(rows, streaming=False), out, indent=2)
            out.write("\n")
        else:
            w = csv.writer(out, lineterminator="\n")
            w.writerow(header(False, args.retain_points))
            w.writerows(format_row(r, params.prec, False, args.retain_points) for r in rows)
    return EXIT_OK


def cmd_stream(args) -> int:
    params = _params(args)
    epoch = None if args.epoch is None else parse_timestamp(args.epoch)
    ingest = IngestConfig(period_length=args.period_seconds, epoch=epoch)
    cfg = PipelineConfig(
        params=params,
        window=args.window,
        num_pi=args.pi,
        num_alpha=args.alpha,
        prime=args.retain_points,
        late_policy=args.late_policy,
        channel_capacity=args.capacity,
        bounds=_bounds(args),
    )
    pipe = Pipeline(cfg)
    with ExitStack() as stack:
        source = read_stream(_open_in(args.input, stack), ingest)
        out = _open_out(args.output, stack)
        if args.format == "geojson":
            rows = list(pipe.run(source))
            json.dump(geojson(rows, streaming=True), out, indent=2)
            out.write("\n")
        else:
            w = csv.writer(out, lineterminator="\n")
            w.writerow(header(True, args.retain_points))
            for _, rows in pipe.periods(source):
                w.writerows(format_row(r, params.prec, True, args.retain_points) for r in rows)
                out.flush()
    st = pipe.stats
    print(
        f"sraster: {st.records} records, {st.late_dropped} late dropped, "
        f"{st.invalid_dropped} invalid dropped, {st.periods_emitted} periods emitted",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_generate(args) -> int:
    spec = load_generator_spec(args.spec)
    truth = args.truth or (args.output.rsplit(".", 1)[0] + ".truth.json")
    with open(args.output, "w", newline="") as out, open(truth, "w") as tout:
        n = write_generated(spec, out, tout)
    log.info("wrote %d rows to %s, ground truth to %s", n, args.output, truth)
    return EXIT_OK


COMMANDS = {"batch": cmd_batch, "stream": cmd_stream, "generate": cmd_generate}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"sraster: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, RejectedInputError) as exc:
        print(f"sraster: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        # downstream reader went away (e.g. piped into head)
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_DATA
    except PipelineError as exc:
        print(f"sraster: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, SRasterError) as exc:
        print(f"sraster: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
