"""Command-line front end: rate sweeps to CSV, self-verification, codec simulation."""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .functions import enumerate_F, xor_function
from .infotheory import QuadratureConfig
from .mlc_codec import simulate
from .modulation import ChannelState, Constellation, load_constellation, make_qpsk_gray
from .rates import CLASSES, GF4, MLC, sweep_snr, sweep_theta
from .verify import run_all


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    constellation: str = "qpsk-gray"
    snr_db: float = 7.0
    snr_range: tuple = (0.0, 20.0, 1.0)
    m: int = 16
    function_class: str = "both"
    grid_points: int = 401
    grid_extent: float = 8.0
    mc_samples: int = 200_000
    seed: int = 0
    out: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise UsageError("--m must be at least 1")
        if self.function_class not in (MLC, GF4, "both"):
            raise UsageError(f"--class must be mlc, gf4 or both, got {self.function_class!r}")
        if self.grid_points < 3:
            raise UsageError("--grid-points must be at least 3")
        if not self.grid_extent > 0:
            raise UsageError("--grid-extent must be positive")
        if self.workers < 1:
            raise UsageError("--workers must be at least 1")
        if self.mc_samples < 10_000:
            raise UsageError("--mc-samples must be at least 10000")
        snr_values(self.snr_range)

    @property
    def classes(self) -> tuple:
        return CLASSES if self.function_class == "both" else (self.function_class,)

    @property
    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(points=self.grid_points, extent=self.grid_extent)

    def load_constellation(self) -> Constellation:
        if self.constellation == "qpsk-gray":
            return make_qpsk_gray()
        try:
            return load_constellation(self.constellation)
        except ValueError as exc:
            raise UsageError(f"bad constellation file {self.constellation}: {exc}") from None


def parse_snr_range(text: str) -> tuple:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:step, got {text!r}") from None
    return lo, hi, step


def snr_values(rng: tuple) -> list:
    lo, hi, step = rng
    if step <= 0 or hi < lo:
        raise UsageError(f"SNR range {lo}:{hi}:{step} is empty")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 10) for i in range(count)]


def _fmt(v: float) -> str:
    return f"{v:.8f}"


def _header(cfg: RunConfig) -> list:
    echo = {k: v for k, v in asdict(cfg).items() if k not in ("out", "workers")}
    return [f"# mlccf {__version__}", f"# config: {json.dumps(echo, sort_keys=True)}"]


def _write(cfg: RunConfig, lines: list, rows: list) -> None:
    if cfg.out in (None, "-"):
        _emit(sys.stdout, lines, rows)
        return
    with open(cfg.out, "w", newline="") as fh:
        _emit(fh, lines, rows)


def _emit(fh, lines, rows) -> None:
    for line in lines:
        fh.write(line + "\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerows(rows)


def cmd_sweep_theta(cfg: RunConfig) -> int:
    if len(cfg.classes) != 1:
        raise UsageError("sweep-theta needs a single --class (mlc or gf4)")
    c = cfg.load_constellation()
    sweep = sweep_theta(c, cfg.snr_db, cfg.m, cfg.classes[0], cfg.quadrature, cfg.workers)
    rows = [["theta", *sweep.function_ids, "envelope", "universal"]]
    for theta, vals, env in zip(sweep.theta, sweep.values, sweep.envelope):
        rows.append([_fmt(theta), *map(_fmt, vals), _fmt(env), _fmt(sweep.universal)])
    _write(cfg, _header(cfg), rows)
    return 0


def cmd_sweep_snr(cfg: RunConfig) -> int:
    c = cfg.load_constellation()
    sweep = sweep_snr(c, snr_values(cfg.snr_range), cfg.m, cfg.classes, cfg.quadrature, cfg.workers)
    rows = [["snr_db", *(f"universal_{cls}" for cls in sweep.classes)]]
    for snr, vals in zip(sweep.snr_db, sweep.universal):
        rows.append([_fmt(snr), *map(_fmt, vals)])
    _write(cfg, _header(cfg), rows)
    return 0


def cmd_verify(cfg: RunConfig, inject_singular: bool = False, out=None) -> int:
    out = out or sys.stdout
    results = run_all(cfg.seed, inject_singular=inject_singular, mc_samples=cfg.mc_samples)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        out.write(f"[{status}] {r.name}: {r.detail}\n")
        for msg in r.failures[:10]:
            out.write(f"    failing: {msg}\n")
    failed = [r.name for r in results if not r.passed]
    if failed:
        out.write(f"FAILED: {', '.join(failed)}\n")
        return 1
    out.write("all suites passed\n")
    return 0


def cmd_codec_sim(cfg: RunConfig, theta: float, k: int, n: int, trials: int, function: str, out=None) -> int:
    out = out or sys.stdout
    c = cfg.load_constellation()
    if function == "xor":
        f = xor_function(c.ell)
    else:
        matches = [g for g in enumerate_F(c.ell) if g.hex_id == function]
        if not matches:
            raise UsageError(f"unknown function id {function!r}")
        f = matches[0]
    ch = ChannelState.from_theta(theta, cfg.snr_db)
    res = simulate(c, ch, f, k, n, trials, np.random.default_rng(cfg.seed))
    lines = _header(cfg)
    rows = [
        ["function", "theta", "snr_db", "k", "n", "trials", "block_errors", "block_error_rate", "destination_errors"],
        [f.hex_id, _fmt(theta), _fmt(cfg.snr_db), k, n, trials, res.block_errors, _fmt(res.block_error_rate), res.destination_errors],
    ]
    if cfg.out in (None, "-"):
        _emit(out, lines, rows)
    else:
        _write(cfg, lines, rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--snr-db", type=float, default=7.0)
    common.add_argument("--snr-range", type=parse_snr_range, default=(0.0, 20.0, 1.0), metavar="LO:HI:STEP")
    common.add_argument("--m", type=int, default=16, help="phase grid step is pi/m")
    common.add_argument("--class", dest="function_class", default=None, choices=["mlc", "gf4", "both"])
    common.add_argument("--grid-points", type=int, default=401)
    common.add_argument("--grid-extent", type=float, default=8.0)
    common.add_argument("--mc-samples", type=int, default=200_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None)
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    common.add_argument("--constellation", default="qpsk-gray", help="file with 'bits re im' lines")

    parser = argparse.ArgumentParser(prog="mlccf", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep-theta", parents=[common], help="per-function rates against phase difference")
    sub.add_parser("sweep-snr", parents=[common], help="universal rates against SNR")
    v = sub.add_parser("verify", parents=[common], help="run the structural self-checks")
    v.add_argument("--inject-singular", action="store_true", help="add a function with singular D_A (fault test)")
    s = sub.add_parser("codec-sim", parents=[common], help="end-to-end block-code simulation")
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--function", default="xor", help="'xor' or a hex id such as 9|6")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    default_class = "mlc" if args.command == "sweep-theta" else "both"
    try:
        cfg = RunConfig(
            command=args.command,
            constellation=args.constellation,
            snr_db=args.snr_db,
            snr_range=tuple(args.snr_range),
            m=args.m,
            function_class=args.function_class or default_class,
            grid_points=args.grid_points,
            grid_extent=args.grid_extent,
            mc_samples=args.mc_samples,
            seed=args.seed,
            out=args.out,
            workers=args.workers,
        )
        if args.command == "sweep-theta":
            return cmd_sweep_theta(cfg)
        if args.command == "sweep-snr":
            return cmd_sweep_snr(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, inject_singular=args.inject_singular)
        return cmd_codec_sim(cfg, args.theta, args.k, args.n, args.trials, args.function)
    except UsageError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"mlccf: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
