"""Command-line interface: figure datasets and the verification report.

    weakduality fringe  [--xf-min --xf-max --xf-step --sigma-slit --sigma-det]
    weakduality weakp   [--xf-min --xf-max --xf-step]
    weakduality traj    [--xf-min --xf-max --xf-step --nt]
    weakduality tagged  [--xf-min --xf-max --xf-step --nt --theta ... --eta ...]
    weakduality verify  [--sigma-slit --sigma-det --grid-n --grid-l]

Every command takes --m --hbar --T --xi --out --format. Exit codes: 0 on
success, 1 when verification fails, 2 on usage, domain or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import doubleslit as ds
from . import oracle
from .core import PhysConfig
from .errors import DomainError, NormalizationUndefinedError, SingularTransitionError
from .verify import VerifyConfig, run_checks

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

FRINGE_COLUMNS = ("x_f", "prob_point", "prob_gaussian")
WEAKP_COLUMNS = ("x_f", "re_pw", "im_pw", "p_plus", "p_minus", "index", "near_singular")
TRAJ_COLUMNS = ("x_f", "t", "re_x", "im_x", "prob")
TAGGED_COLUMNS = ("x_f", "theta", "eta", "t", "re_xp", "im_xp", "re_xm", "im_xm",
                  "re_xp_norm", "re_xm_norm", "prob")
VERIFY_COLUMNS = ("name", "passed", "error", "tolerance", "detail")


@dataclass
class RunConfig:
    cfg: PhysConfig = field(default_factory=PhysConfig)
    out: Optional[str] = None
    format: str = "csv"
    xf_min: float = -3.0
    xf_max: float = 3.0
    xf_step: float = 0.01
    thetas: tuple[float, ...] = (0.0, math.pi / 2, math.pi)
    etas: tuple[float, ...] = (0.0,)
    sigma_slit: Optional[float] = None
    sigma_det: Optional[float] = None
    nt: int = ds.DEFAULT_TIME_SAMPLES
    grid_n: Optional[int] = None
    grid_l: Optional[float] = None

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.format!r}")
        if not self.xf_step > 0:
            raise DomainError(f"--xf-step must be positive, got {self.xf_step!r}")
        if self.xf_max < self.xf_min:
            raise DomainError("--xf-max must not be below --xf-min")
        if self.nt < 2:
            raise DomainError("--nt must be at least 2")

    def screen_points(self) -> list[float]:
        count = int(math.floor((self.xf_max - self.xf_min) / self.xf_step + 1e-9)) + 1
        return [round(self.xf_min + j * self.xf_step, 12) for j in range(count)]

    def times(self) -> np.ndarray:
        return ds.default_times(self.cfg, self.nt)


@dataclass
class Dataset:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_format_cell(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        records = [dict(zip(self.columns, (_json_cell(v) for v in row))) for row in self.rows]
        return json.dumps({"columns": list(self.columns), "rows": records}, indent=1) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return format(value + 0.0, ".12g")
    return str(value)


def _json_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, float):
        return value + 0.0
    return value


def cmd_fringe(run: RunConfig) -> Dataset:
    """Fringe probability for point slits and, with a slit width, Gaussian slits."""
    gaussian = run.sigma_slit is not None
    columns = FRINGE_COLUMNS if gaussian else FRINGE_COLUMNS[:2]
    sigma_det = run.sigma_det if run.sigma_det is not None else run.sigma_slit
    data = Dataset(columns)
    for x_f in run.screen_points():
        row = [x_f, ds.fringe_probability(x_f, run.cfg)]
        if gaussian:
            row.append(ds.fringe_probability_gaussian(x_f, run.sigma_slit, sigma_det, run.cfg,
                                                      normalized=True))
        data.rows.append(tuple(row))
    return data


def cmd_weakp(run: RunConfig) -> Dataset:
    data = Dataset(WEAKP_COLUMNS)
    for x_f in run.screen_points():
        p_plus, p_minus = ds.branch_momentum_weak_values(x_f, run.cfg)
        try:
            pw = ds.momentum_weak_value(x_f, run.cfg)
        except SingularTransitionError:
            data.rows.append((x_f, None, None, p_plus, p_minus, None, 1))
            continue
        index = ds.interference_index_closed(x_f, run.cfg)
        data.rows.append((x_f, pw.value.real, pw.value.imag, p_plus, p_minus, index,
                          int(pw.near_singular)))
    return data


def cmd_traj(run: RunConfig) -> Dataset:
    """Long-format weak trajectories, one block of rows per screen point."""
    data = Dataset(TRAJ_COLUMNS)
    times = run.times()
    for x_f in run.screen_points():
        prob = ds.fringe_probability(x_f, run.cfg)
        try:
            series = ds.weak_trajectory(x_f, times, run.cfg)
        except SingularTransitionError:
            data.rows.extend((x_f, float(t), None, None, prob) for t in times)
            continue
        for t, v in zip(series.times, series.values):
            data.rows.append((x_f, float(t), float(v.real), float(v.imag), prob))
    return data


def cmd_tagged(run: RunConfig) -> Dataset:
    data = Dataset(TAGGED_COLUMNS)
    times = run.times()
    for theta in run.thetas:
        for eta in run.etas:
            for x_f in run.screen_points():
                data.rows.extend(_tagged_rows(x_f, theta, eta, times, run.cfg))
    return data


def _tagged_rows(x_f, theta, eta, times, cfg):
    prob = ds.tagged_transition_probability(x_f, theta, eta, cfg)
    try:
        plus, minus = ds.tagged_weak_trajectories(x_f, theta, eta, times, cfg)
    except SingularTransitionError:
        return [(x_f, theta, eta, float(t)) + (None,) * 6 + (prob,) for t in times]
    normalized = []
    for branch in ("+", "-"):
        try:
            pair = ds.normalized_tagged_trajectories(x_f, theta, eta, times, cfg, branches=(branch,))
            series = pair[0] if branch == "+" else pair[1]
            normalized.append(series.values.real)
        except NormalizationUndefinedError:
            normalized.append([None] * len(times))
    rows = []
    for j, t in enumerate(plus.times):
        xp, xm = plus.values[j], minus.values[j]
        rows.append((x_f, theta, eta, float(t), float(xp.real), float(xp.imag),
                     float(xm.real), float(xm.imag),
                     _maybe_float(normalized[0][j]), _maybe_float(normalized[1][j]), prob))
    return rows


def _maybe_float(v):
    return None if v is None else float(v)


def cmd_verify(run: RunConfig, stream=None) -> tuple[int, Dataset]:
    """Run the verification suite; returns the exit status and the report table."""
    stream = sys.stdout if stream is None else stream
    sigma = run.sigma_slit if run.sigma_slit is not None else oracle.DEFAULT_SIGMA
    sigma_det = run.sigma_det if run.sigma_det is not None else sigma
    grid = None
    if run.grid_n is not None or run.grid_l is not None:
        auto = oracle.Grid.for_sigma(min(sigma, sigma_det, *oracle.SWEEP_SIGMAS), run.cfg)
        grid = oracle.Grid(run.grid_l if run.grid_l is not None else auto.half_width,
                           run.grid_n if run.grid_n is not None else auto.points)
    vc = VerifyConfig(run.cfg, sigma, sigma_det, grid)
    print(f"grid: L = {vc.grid.half_width:.6g}, N = {vc.grid.points}, dx = {vc.grid.dx:.4g}; "
          f"sigma = {vc.sigma:g}, sigma_det = {vc.sigma_det:g}", file=stream)

    def progress(result):
        err = "n/a" if result.error is None else f"{result.error:.3e}"
        status = "PASS" if result.passed else "FAIL"
        print(f"{status}  {result.name:<34} error {err:>10}  tol {result.tolerance:.0e}  {result.detail}",
              file=stream)

    results = run_checks(vc, progress=progress)
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=stream)
    table = Dataset(VERIFY_COLUMNS, [(r.name, r.passed, r.error, r.tolerance, r.detail) for r in results])
    return (EXIT_FAILED if failed else EXIT_OK), table


def _floats(text: str) -> float:
    """Parse a float, accepting 'pi' multiples such as pi/2 or 3pi/4."""
    t = text.strip().lower().replace(" ", "")
    if "pi" in t:
        num, _, den = t.partition("/")
        factor = num.replace("*", "").replace("pi", "") or "1"
        factor = "-1" if factor == "-" else factor
        value = float(factor) * math.pi / (float(den) if den else 1.0)
        return value
    return float(t)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("physical constants and output")
    g.add_argument("--m", type=float, default=1.0, help="particle mass")
    g.add_argument("--hbar", type=float, default=1.0, help="action scale")
    g.add_argument("--T", type=float, default=1.0, dest="T", help="flight time to the screen")
    g.add_argument("--xi", type=float, default=1.0, help="slit half-separation")
    g.add_argument("--out", default=None, help="output file (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), default="csv")

    sweep = argparse.ArgumentParser(add_help=False)
    s = sweep.add_argument_group("screen sweep")
    s.add_argument("--xf-min", type=float, default=-3.0)
    s.add_argument("--xf-max", type=float, default=3.0)
    s.add_argument("--xf-step", type=float, default=None)

    parser = argparse.ArgumentParser(prog="weakduality", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fringe", parents=[common, sweep], help="transition probability on the screen")
    p.add_argument("--sigma-slit", type=float, default=None, help="Gaussian slit width (adds prob_gaussian)")
    p.add_argument("--sigma-det", type=float, default=None, help="detector width (default: slit width)")

    sub.add_parser("weakp", parents=[common, sweep], help="momentum weak values and interference index")

    p = sub.add_parser("traj", parents=[common, sweep], help="weak trajectories x_w(t)")
    p.add_argument("--nt", type=int, default=ds.DEFAULT_TIME_SAMPLES, help="time samples on [0, T]")

    p = sub.add_parser("tagged", parents=[common, sweep], help="spin-tagged weak trajectories")
    p.add_argument("--nt", type=int, default=ds.DEFAULT_TIME_SAMPLES, help="time samples on [0, T]")
    p.add_argument("--theta", type=_floats, nargs="+", default=None,
                   help="spinor polar angles (accepts pi/2 etc.; default: 0 pi/2 pi)")
    p.add_argument("--eta", type=_floats, nargs="+", default=None, help="spinor phases (default: 0)")

    p = sub.add_parser("verify", parents=[common], help="oracle vs closed-form verification suite")
    p.add_argument("--sigma-slit", type=float, default=None, help="regularization width of the slits")
    p.add_argument("--sigma-det", type=float, default=None, help="regularization width of the detector")
    p.add_argument("--grid-n", type=int, default=None, help="lattice points (power of two)")
    p.add_argument("--grid-l", type=float, default=None, help="lattice half-width")
    return parser


_DEFAULT_STEPS = {"fringe": 0.01, "weakp": 0.01, "traj": 0.05, "tagged": 0.05}


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    kwargs = dict(
        cfg=PhysConfig(m=args.m, hbar=args.hbar, T=args.T, x_i=args.xi),
        out=args.out,
        format=args.format,
    )
    if args.command in _DEFAULT_STEPS:
        kwargs.update(xf_min=args.xf_min, xf_max=args.xf_max,
                      xf_step=args.xf_step if args.xf_step is not None else _DEFAULT_STEPS[args.command])
    for name in ("sigma_slit", "sigma_det", "nt", "grid_n", "grid_l"):
        if getattr(args, name, None) is not None:
            kwargs[name] = getattr(args, name)
    if getattr(args, "theta", None) is not None:
        kwargs["thetas"] = tuple(args.theta)
    if getattr(args, "eta", None) is not None:
        kwargs["etas"] = tuple(args.eta)
    return RunConfig(**kwargs)


def _write(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


COMMANDS = {"fringe": cmd_fringe, "weakp": cmd_weakp, "traj": cmd_traj, "tagged": cmd_tagged}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = run_config_from_args(args)
        if args.command == "verify":
            # the human-readable report goes to stdout unless stdout carries the json report
            to_stdout_json = args.out is None and args.format == "json"
            status, table = cmd_verify(run, sys.stderr if to_stdout_json else sys.stdout)
            if args.out is not None or to_stdout_json:
                _write(table.render(run.format), run.out)
            return status
        _write(COMMANDS[args.command](run).render(run.format), run.out)
    except (DomainError, SingularTransitionError, NormalizationUndefinedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
