"""Command-line front end: scenario sweeps, wavefunction snapshots and validation.

Exit codes: 0 success, 1 a validation check failed, 2 invalid parameters,
3 oracle boundary contamination, 4 a computed probability left [0, 1].
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import double_well as dw
from . import kick, oracle, single_well as sw
from .errors import BoundaryContaminationWarning, ConfigurationError, DomainError, ProbabilityRangeError

UNIT = "dimensionless"
EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_BOUNDARY, EXIT_PROBABILITY = 0, 1, 2, 3, 4
# Fraction of the norm allowed in the outer 10% of the oracle box before a run is rejected.
BOUNDARY_MASS_LIMIT = 1e-2
SCENARIOS = ("retention", "delay", "evolve", "dwp-spectrum", "retrap", "kick-retention", "kick-transition", "validate")


class InvalidParameters(Exception):
    pass


class ProbabilityOutOfRange(Exception):
    pass


class BoundaryContaminated(Exception):
    pass


def parse_range(text: str, name: str = "range"):
    """``start:stop:step`` to an array including ``stop`` within half a step."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidParameters(f"{name} must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise InvalidParameters(f"{name} has a non-numeric field: {text!r}") from None
    if not all(map(math.isfinite, (start, stop, step))):
        raise InvalidParameters(f"{name} must be finite")
    if not step > 0:
        raise InvalidParameters(f"{name} step must be > 0")
    if stop < start:
        raise InvalidParameters(f"{name} is empty: stop < start")
    n = int(math.floor((stop - start) / step + 0.5)) + 1
    return start + step * np.arange(n)


@dataclass
class RunConfig:
    scenario: str
    params: dict = field(default_factory=dict)
    grid: dict | None = None
    out: Path | None = None
    fmt: str = "csv"


@dataclass
class Table:
    columns: list
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"{c} [{UNIT}]" for c in self.columns])
        for row in self.rows:
            w.writerow(["" if v is None else f"{v:.11e}" for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [[None if v is None else float(f"{v:.11e}") for v in row] for row in self.rows]
        return json.dumps({"columns": self.columns, "units": UNIT, "rows": rows}, indent=1) + "\n"

    def render(self, fmt) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()


def _check_probability(p, where):
    if p is not None and not 0.0 <= p <= 1.0:
        raise ProbabilityOutOfRange(f"{where}: probability {p!r} outside [0, 1]")
    return p


def _values(args, single, sweep, name, required=True):
    a, b = getattr(args, single, None), getattr(args, sweep, None)
    if a is not None and b is not None:
        raise InvalidParameters(f"give either --{name} or --{name}-range, not both")
    if b is not None:
        return parse_range(b, f"--{name}-range")
    if a is not None:
        return np.atleast_1d(np.asarray(a, dtype=float))
    if required:
        raise InvalidParameters(f"--{name} or --{name}-range is required")
    return None


def _sweep(func, points, jobs):
    # rows come back in parameter order whatever the completion order
    if jobs <= 1:
        return [func(p) for p in points]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, points))


def _positive(values, name, strict=True):
    bad = values[values <= 0] if strict else values[values < 0]
    if bad.size:
        rel = ">" if strict else ">="
        raise InvalidParameters(f"{name} must be {rel} 0, got {bad[0]:g}")


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------


def run_retention(args):
    ls = _values(args, "l", "l_range", "l")
    _positive(ls, "l")
    if args.optimum:
        rows = _sweep(lambda l: (l, *sw.optimal_strength(l)), ls, args.jobs)
        for r in rows:
            _check_probability(r[2], "retention optimum")
        return Table(["l", "mu_max", "P_max"], rows), {"l": ls.tolist(), "optimum": True}
    mus = _values(args, "mu", "mu_range", "mu")
    _positive(mus, "mu")
    pts = [(l, mu) for l in ls for mu in mus]
    probs = _sweep(lambda p: float(sw.retention_probability(p[1], p[0])), pts, args.jobs)
    if len(ls) == 1:
        rows = [(mu, _check_probability(p, "retention")) for (_, mu), p in zip(pts, probs)]
        return Table(["mu", "P"], rows), {"l": float(ls[0]), "mu": mus.tolist()}
    rows = [(l, mu, _check_probability(p, "retention")) for (l, mu), p in zip(pts, probs)]
    return Table(["l", "mu", "P"], rows), {"l": ls.tolist(), "mu": mus.tolist()}


def run_delay(args):
    ls = _values(args, "l", "l_range", "l")
    _positive(ls, "l")
    if args.optimum:
        rows = _sweep(lambda l: (l, *sw.delay_optimum(l)), ls, args.jobs)
        for r in rows:
            _check_probability(r[2], "delay optimum")
        return Table(["l", "tau_star", "P_star"], rows), {"l": ls.tolist(), "optimum": True}
    taus = _values(args, "tau", "tau_range", "tau")
    _positive(taus, "tau", strict=False)
    rows = []
    for l in ls:
        probs = np.abs(sw.delayed_amplitude(taus, float(l))) ** 2
        for tau, p in zip(taus, probs):
            rows.append((l, tau, _check_probability(float(p), "delay")) if len(ls) > 1 else (tau, _check_probability(float(p), "delay")))
    cols = ["l", "tau", "P"] if len(ls) > 1 else ["tau", "P"]
    return Table(cols, rows), {"l": ls.tolist(), "tau": taus.tolist()}


def run_dwp_spectrum(args):
    ls = _values(args, "l", "l_range", "l")
    _positive(ls, "l")

    def row(l):
        e_even, e_odd = dw.spectrum(float(l))
        return (l, abs(e_even), None if e_odd is None else abs(e_odd))

    return Table(["l", "abs_E_even", "abs_E_odd"], _sweep(row, ls, args.jobs)), {"l": ls.tolist()}


def run_retrap(args):
    ls = _values(args, "l", "l_range", "l")
    _positive(ls, "l")

    def row(l):
        pe, po = dw.retrap_probabilities(float(l))
        return (l, _check_probability(pe.value, "retrap even"), None if po is None else _check_probability(po.value, "retrap odd"))

    return Table(["l", "p_even", "p_odd"], _sweep(row, ls, args.jobs)), {"l": ls.tolist()}


def run_kick_retention(args):
    ks = _values(args, "k", "k_range", "k")
    rows = [(k, k * k, _check_probability(kick.kick_retention(float(k)).value, "kick retention")) for k in ks]
    return Table(["k", "k2", "P"], rows), {"k": ks.tolist()}


def run_kick_transition(args):
    ls = _values(args, "l", "l_range", "l")
    bad = ls[ls <= 1]
    if bad.size:
        raise InvalidParameters(f"kick-transition needs l > 1 (odd state must exist), got l = {bad[0]:g}")
    if args.optimum:
        rows = _sweep(lambda l: (l, *kick.transition_optimum(float(l))), ls, args.jobs)
        for r in rows:
            _check_probability(r[2], "transition optimum")
        return Table(["l", "k2_max", "P_max", "delta_E"], rows), {"l": ls.tolist(), "optimum": True}
    ks = _values(args, "k", "k_range", "k")
    rows = []
    for l in ls:
        probs = kick.transition_probability(ks, float(l))
        for k, p in zip(ks, probs):
            p = _check_probability(float(p), "kick transition")
            rows.append((l, k, k * k, p) if len(ls) > 1 else (k, k * k, p))
    cols = ["l", "k", "k2", "P"] if len(ls) > 1 else ["k", "k2", "P"]
    return Table(cols, rows), {"l": ls.tolist(), "k": ks.tolist()}


def _grid_from_args(args, l):
    half = args.domain if args.domain is not None else oracle.ACCEPTANCE_HALF_WIDTH
    dx = args.dx if args.dx is not None else oracle.ACCEPTANCE_DX
    dt = args.dt if args.dt is not None else oracle.ACCEPTANCE_DT
    try:
        grid = oracle.Grid.symmetric(half, dx, dt)
        grid.index_of(0.0)
        grid.index_of(-l)
    except ConfigurationError as exc:
        raise InvalidParameters(f"grid: {exc}") from None
    return grid


def emit_snapshots(args, out_dir: Path):
    """Snapshot CSVs of the analytic and oracle densities plus the centre time series."""
    mu, l = args.mu, args.l
    if mu is None or l is None:
        raise InvalidParameters("evolve needs --mu and --l")
    if mu < 0 or l < 0:
        raise InvalidParameters("evolve needs mu >= 0 and l >= 0")
    times = sorted(set(args.t if args.t else [0.07, 15.0]))
    if times[0] <= 0:
        raise InvalidParameters("snapshot times must be > 0")
    if args.series_t_max <= 0 or args.series_dt <= 0:
        raise InvalidParameters("series range must be positive")
    if args.stride < 1:
        raise InvalidParameters("--stride must be >= 1")
    grid = _grid_from_args(args, l)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    edge = []
    if not args.no_oracle:
        psi0 = oracle.WaveField.sample(lambda x: sw.initial_state(x, l), grid)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoundaryContaminationWarning)
            snaps = oracle.tdse_snapshots(psi0, oracle.hop_schedule(mu, l, times[-1]), times)
    else:
        snaps = [None] * len(times)
    x = grid.nodes[:: args.stride]
    for t, snap in zip(times, snaps):
        init = np.abs(sw.initial_state(x, l)) ** 2
        exact = np.abs(sw.evolve_after_switch(x, t, mu, l)) ** 2
        cols = ["x", "initial_density", "analytic_density"]
        data = [x, init, exact]
        if snap is not None:
            cols.append("oracle_density")
            data.append(snap.density()[:: args.stride])
            edge.append((t, snap.edge_mass()))
        table = Table(cols, list(zip(*data)))
        path = out_dir / f"snapshot_t{t:g}.{args.format}"
        path.write_text(table.render(args.format), encoding="utf-8", newline="\n")
        written.append(path.name)

    ts = args.series_dt * np.arange(1, int(math.floor(args.series_t_max / args.series_dt + 0.5)) + 1)
    center = np.array([abs(complex(sw.evolve_after_switch(0.0, float(t), mu, l))) ** 2 for t in ts])
    p_ret = float(sw.retention_probability(mu, l)) if mu > 0 else 0.0
    asymptote = mu * p_ret  # |psi_fin(0)|^2 = mu times the retained weight
    rows = [(t, c, asymptote, p_ret) for t, c in zip(ts, center)]
    series = Table(["t", "center_density", "asymptote", "retention_P"], rows)
    path = out_dir / f"center_series.{args.format}"
    path.write_text(series.render(args.format), encoding="utf-8", newline="\n")
    written.append(path.name)

    params = {"mu": mu, "l": l, "t": times, "series_t_max": args.series_t_max, "series_dt": args.series_dt, "stride": args.stride, "files": written}
    if edge:
        params["edge_mass"] = {f"{t:g}": m for t, m in edge}
    bad = [(t, m) for t, m in edge if m > BOUNDARY_MASS_LIMIT]
    grid_info = {"x_min": grid.x_min, "x_max": grid.x_max, "dx": grid.dx, "dt": grid.dt}
    return params, grid_info, bad


def run_validate(args):
    from . import validation

    wanted = set(args.criteria) if args.criteria else None
    results = validation.run_all(wanted)
    for r in results:
        print(r.report() if args.verbose else r.line())
    rows = [(r.number, 1.0 if r.passed else 0.0, r.runtime_s) for r in results]
    return Table(["criterion", "passed", "runtime_s"], rows), {"criteria": sorted(wanted) if wanted else "all"}, all(r.passed for r in results)


RUNNERS = {
    "retention": run_retention,
    "delay": run_delay,
    "dwp-spectrum": run_dwp_spectrum,
    "retrap": run_retrap,
    "kick-retention": run_kick_retention,
    "kick-transition": run_kick_transition,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="output file (directory for evolve); stdout when omitted")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=None, help="reserved; all computations are deterministic")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")

    p = argparse.ArgumentParser(prog="switchtrap", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="scenario", required=True)

    s = sub.add_parser("retention", parents=[common], help="retention after an instantaneous hop")
    s.add_argument("--mu", type=_floats)
    s.add_argument("--mu-range", dest="mu_range")
    s.add_argument("--l", type=_floats)
    s.add_argument("--l-range", dest="l_range")
    s.add_argument("--optimum", action="store_true", help="report the optimal strength per l")

    s = sub.add_parser("delay", parents=[common], help="retrapping after a delayed switch-on")
    s.add_argument("--l", type=_floats)
    s.add_argument("--l-range", dest="l_range")
    s.add_argument("--tau", type=_floats)
    s.add_argument("--tau-range", dest="tau_range")
    s.add_argument("--optimum", action="store_true", help="report the optimal delay per l")

    s = sub.add_parser("evolve", parents=[common], help="wavefunction snapshots and centre time series")
    s.add_argument("--mu", type=float)
    s.add_argument("--l", type=float)
    s.add_argument("--t", type=_floats, help="snapshot times, comma separated (default 0.07,15)")
    s.add_argument("--series-t-max", dest="series_t_max", type=float, default=50.0)
    s.add_argument("--series-dt", dest="series_dt", type=float, default=0.05)
    s.add_argument("--dx", type=float)
    s.add_argument("--dt", type=float)
    s.add_argument("--domain", type=float, help="half-width L of the oracle box [-L, L]")
    s.add_argument("--stride", type=int, default=10, help="write every n-th grid node")
    s.add_argument("--no-oracle", dest="no_oracle", action="store_true", help="skip the numerical evolution")

    for name, helptext in (("dwp-spectrum", "double-well bound-state energies"), ("retrap", "double-well retrapping probabilities")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--l", type=_floats)
        s.add_argument("--l-range", dest="l_range")

    s = sub.add_parser("kick-retention", parents=[common], help="single-well retention after a kick")
    s.add_argument("--k", type=_floats)
    s.add_argument("--k-range", dest="k_range")

    s = sub.add_parser("kick-transition", parents=[common], help="even-odd transition after a kick")
    s.add_argument("--l", type=_floats)
    s.add_argument("--l-range", dest="l_range")
    s.add_argument("--k", type=_floats)
    s.add_argument("--k-range", dest="k_range")
    s.add_argument("--optimum", action="store_true", help="report the most effective kick per l")

    s = sub.add_parser("validate", parents=[common], help="run the analytic-vs-oracle acceptance checks")
    s.add_argument("--criteria", type=lambda v: [int(c) for c in v.split(",")], help="subset, e.g. 1,4,9")
    s.add_argument("-v", "--verbose", action="store_true")
    return p


def _write_outputs(args, table, params, grid, runtime):
    text = table.render(args.format)
    if args.out is None:
        sys.stdout.write(text)
        return
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(text, encoding="utf-8", newline="\n")
    _write_sidecar(args.out.with_suffix(".meta.json"), args.scenario, params, grid, runtime)


def _write_sidecar(path, scenario, params, grid, runtime):
    meta = {"scenario": scenario, "params": params, "grid": grid, "version": __version__, "runtime_s": runtime}
    path.write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8", newline="\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        if args.jobs < 1:
            raise InvalidParameters("--jobs must be >= 1")
        if args.scenario == "validate":
            table, params, ok = run_validate(args)
            if args.out is not None:
                _write_outputs(args, table, params, None, time.perf_counter() - start)
            return EXIT_OK if ok else EXIT_CHECK_FAILED
        if args.scenario == "evolve":
            out_dir = args.out if args.out is not None else Path("evolve_out")
            params, grid, bad = emit_snapshots(args, out_dir)
            _write_sidecar(out_dir / "evolve.meta.json", "evolve", params, grid, time.perf_counter() - start)
            if bad:
                t, m = bad[0]
                raise BoundaryContaminated(
                    f"oracle box too small: {m:.2e} of the norm sits in the outer 10% at t = {t:g} "
                    f"(limit {BOUNDARY_MASS_LIMIT:g}); enlarge --domain"
                )
            return EXIT_OK
        table, params = RUNNERS[args.scenario](args)
        _write_outputs(args, table, params, None, time.perf_counter() - start)
        return EXIT_OK
    except (InvalidParameters, DomainError, ConfigurationError) as exc:
        print(f"switchtrap {args.scenario}: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BoundaryContaminated as exc:
        print(f"switchtrap {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_BOUNDARY
    except (ProbabilityOutOfRange, ProbabilityRangeError) as exc:
        print(f"switchtrap {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_PROBABILITY


if __name__ == "__main__":
    sys.exit(main())
