"""Command-line front end: ``catwatt <command> [flags]``.

Every command writes CSV (or JSON with ``--json``) to stdout or ``--out``.
CSV output starts with '#' lines echoing the version, the command and the
full configuration, so a file is enough to reproduce it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .analysis import billed_curves, physical_decay_curve, verify_suite
from .circuit import build_logical_qft, build_physical_qft, schedule
from .classical import MACHINES, Mode, beta_for, compare, crossover_closed_form
from .fitting import FitModel, fit
from .gates import GateTable
from .model import evaluate
from .optimizer import SearchSpace, code_for, optimize_levels, scaling_curves
from .params import TWO_PI, CodeConfig, ConfigError, Level, OperatingPoint, dump_config, load_config, default_config_path

SWEEP_COLUMNS = ("n", "eps_z_over_2pi_hz", "kappa2_ratio", "d_c", "n_b", "energy_j", "time_s",
                 "fidelity_last", "fidelity_total", "level")


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- helpers


def _pair(text: str, name: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{name} expects 'low,high'") from None
    if not a <= b:
        raise UsageError(f"{name}: low must not exceed high")
    return a, b


def _int_range(text: str) -> list[int]:
    """'2:50' (inclusive), '2:50:4' or '3,5,8'."""
    try:
        if ":" in text:
            parts = [int(v) for v in text.split(":")]
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            return list(range(lo, hi + 1, step))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse range {text!r}") from None


def _fix(text: str | None) -> dict[str, int | None]:
    out: dict[str, int | None] = {}
    if not text:
        return out
    for item in text.split(","):
        k, _, v = item.partition("=")
        k = k.strip().lower()
        if k not in ("dc", "nb"):
            raise UsageError(f"--fix accepts dc=<odd>,nb=<int>; got {item!r}")
        out[k] = None if v.strip().lower() in ("none", "inf") else int(v)
    return out


def _levels(text: str) -> list[Level]:
    if text == "both":
        return [Level.MICRO, Level.MACRO]
    return [Level.parse(text)]


def _grid(text: str) -> tuple[int, int]:
    if "x" in text:
        a, b = text.lower().split("x")
        return int(a), int(b)
    return int(text), int(text)


def _num(x: Any) -> Any:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


class Output:
    def __init__(self, args, cfg_text: str):
        self.args = args
        self.meta: list[tuple[str, Any]] = [("catwatt", __version__), ("command", " ".join(args.argv))]
        self.cfg_text = cfg_text
        self.columns: Sequence[str] = ()
        self.rows: list[Sequence[Any]] = []
        self.extra: dict[str, Any] = {}

    def render(self) -> str:
        if self.args.json:
            doc = {
                "meta": dict(self.meta),
                "config": self.cfg_text.splitlines(),
                "columns": list(self.columns),
                "rows": [[float(v) if isinstance(v, (np.floating,)) else v for v in r] for r in self.rows],
                **self.extra,
            }
            return json.dumps(doc, indent=2, default=_json_default) + "\n"
        buf = io.StringIO()
        for k, v in self.meta:
            buf.write(f"# {k}: {v}\n")
        for k, v in self.extra.items():
            buf.write(f"# {k}: {json.dumps(v, default=_json_default)}\n")
        for line in self.cfg_text.splitlines():
            buf.write(f"# config {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        if self.columns:
            w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_num(v) for v in r])
        return buf.getvalue()


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not serializable: {type(o)}")


def _space(args, cfg) -> SearchSpace:
    fixed = _fix(getattr(args, "fix", None))
    d_set = (fixed["dc"],) if "dc" in fixed else tuple(range(5, 26, 2))
    nb_set = (fixed["nb"],) if "nb" in fixed else (1, 2, 3)
    eps = _pair(args.eps_range, "--eps-range")
    kap = _pair(args.kappa_range, "--kappa-range")
    return SearchSpace.grid(args.resolution, (eps[0] * 1e6, eps[1] * 1e6), kap, d_set, nb_set, args.alpha)


# ---------------------------------------------------------------- commands


def cmd_heatmap(args, cfg, out: Output):
    n = args.qubits
    rows_n, cols_n = _grid(args.grid)
    eps = np.linspace(*_pair(args.eps_range, "--eps-range"), cols_n) * 1e6
    kap = np.geomspace(*_pair(args.kappa_range, "--kappa-range"), rows_n)
    if args.logical:
        code = CodeConfig(args.dc, args.nb, True)
    elif args.dc is not None or args.nb is not None:
        raise UsageError("--dc/--nb require --logical")
    else:
        code = CodeConfig()
    levels = _levels(args.level)
    op = OperatingPoint(args.alpha, kap[:, None], TWO_PI * eps[None, :], cfg.op.g_cnot, Level.MACRO)
    ev = evaluate(n, code, cfg.pc, cfg.mf, op, cfg.options, levels)
    shape = (rows_n, cols_n)
    F_tot = np.broadcast_to(ev.fidelity_total, shape)
    F_last = np.broadcast_to(ev.fidelity_last, shape)
    out.columns = ("eps_z_over_2pi_hz", "kappa2_ratio", "energy_j", "fidelity_total", "fidelity_last", "level")
    for lv in levels:
        en = np.broadcast_to(ev.energy(lv), shape)
        for r in range(rows_n):
            for c in range(cols_n):
                out.rows.append((float(eps[c]), float(kap[r]), float(en[r, c]), float(F_tot[r, c]),
                                 float(F_last[r, c]), lv.value))
    if args.plot:
        from .plotting import heatmap_figure

        lv = levels[-1]
        heatmap_figure(args.plot, eps, kap, np.broadcast_to(ev.energy(lv), shape), F_tot,
                       f"{n} qubits, {lv.value}, {'d=%d' % code.d_c if code.enabled else 'physical'}")


def _sweep_rows(curves, out: Output):
    for lv, curve in curves.items():
        for n, r in curve:
            out.rows.append((n, r.epsilon_z / TWO_PI, r.kappa2_ratio, r.d_c, "none" if r.n_b is None else r.n_b,
                             r.energy if r.feasible else math.inf, r.total_time, r.last_qubit_fidelity,
                             r.total_fidelity, lv.value))


def cmd_scaling(args, cfg, out: Output):
    ns = _int_range(args.n_range)
    space = _space(args, cfg)
    want = _levels(args.level) if args.level != "billed" else [Level.MACRO]
    curves = scaling_curves(ns, args.fidelity, space, want, cfg, args.workers)
    out.columns = SWEEP_COLUMNS
    _sweep_rows(curves, out)
    fits = {}
    for lv, curve in curves.items():
        pts = [(n, r.energy) for n, r in curve if r.feasible]
        if len(pts) >= 4:
            f = fit(FitModel.POWER_LAW, pts)
            fits[lv.value] = {**f.params, "residual": f.residual_norm}
    out.extra["power_law_fit"] = fits
    if args.level == "billed":
        if not cfg.scenarios:
            raise UsageError("billed level needs billed.<scenario>.power_per_qubit_w in the config")
        bc = billed_curves(curves[Level.MACRO], list(cfg.scenarios.values()))
        for name, pts in bc.items():
            for (n, e), (_, r) in zip(pts, curves[Level.MACRO]):
                out.rows.append((n, r.epsilon_z / TWO_PI, r.kappa2_ratio, r.d_c, r.n_b, e, r.total_time,
                                 r.last_qubit_fidelity, r.total_fidelity, f"billed:{name}"))
        out.extra["note"] = "billed energies depend on the configured per-qubit powers"
    if args.plot:
        from .plotting import curves_figure

        series = {}
        for row in out.rows:
            series.setdefault(row[-1], []).append((row[0], row[5]))
        curves_figure(args.plot, series, "energy (J)", title=f"optimized energy, F_last >= {args.fidelity}")


def cmd_optimize(args, cfg, out: Output):
    space = _space(args, cfg)
    res = optimize_levels(args.qubits, args.fidelity, space, _levels(args.level), cfg)
    out.columns = SWEEP_COLUMNS + ("feasible", "evaluations", "g_cnot_over_2pi_hz", "physical_qubits")
    for lv, r in res.items():
        out.rows.append((args.qubits, r.epsilon_z / TWO_PI, r.kappa2_ratio, r.d_c, r.n_b, r.energy,
                         r.total_time, r.last_qubit_fidelity, r.total_fidelity, lv.value, r.feasible,
                         r.evaluations, r.g_cnot / TWO_PI, r.physical_qubits))


def cmd_compare(args, cfg, out: Output):
    mode = Mode(args.mode)
    machines = {**MACHINES, **cfg.machines}
    if args.machine not in machines:
        raise UsageError(f"unknown machine {args.machine!r}; known: {', '.join(sorted(machines))}")
    machine = machines[args.machine]
    if args.optimize == "fixed" and not args.fix:
        args.fix = "dc=5,nb=1"
    elif args.optimize == "full":
        args.fix = None
    space = _space(args, cfg)
    level = Level.parse(args.level)
    curve = scaling_curves(_int_range(args.n_range), args.fidelity, space, [level], cfg, args.workers)[level]
    q = [(n, (r.energy if mode is Mode.ENERGY else r.total_time)) for n, r in curve if r.feasible]
    cmp_ = compare(q, machine, mode)
    out.columns = ("n", "classical", "quantum", "ratio")
    out.rows = [(r.n, r.classical, r.quantum, r.ratio) for r in cmp_.rows]
    out.extra["machine"] = machine.name
    out.extra["mode"] = mode.value
    out.extra["first_advantage_n"] = cmp_.first_advantage
    out.extra["bracketed"] = cmp_.bracketed
    if len(q) >= 4:
        f = fit(FitModel.POWER_LAW, q)
        try:
            cr = crossover_closed_form(f["a"], beta_for(machine, mode), f["b"])
            out.extra["fit_crossover"] = {"gamma": f["a"], "degree": f["b"], "x_closed_form": cr.x_closed_form,
                                          "x_numeric": cr.x_numeric, "branch": cr.branch_used.name}
        except ValueError as e:
            out.extra["fit_crossover"] = {"gamma": f["a"], "degree": f["b"], "error": str(e)}
    if args.plot:
        from .plotting import curves_figure

        curves_figure(args.plot, {"classical": [(r.n, r.classical) for r in cmp_.rows],
                                  "quantum": [(r.n, r.quantum) for r in cmp_.rows]},
                      "energy (J)" if mode is Mode.ENERGY else "time (s)", title=f"vs {machine.name}")


def _read_xy(path: str, xcol: str, ycol: str) -> list[tuple[float, float]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    reader = csv.DictReader(lines)
    pts = []
    for row in reader:
        try:
            pts.append((float(row[xcol]), float(row[ycol])))
        except KeyError:
            raise UsageError(f"column {xcol!r} or {ycol!r} missing in {path}") from None
        except ValueError:
            continue
    return pts


def cmd_fit(args, cfg, out: Output):
    if args.builtin == "physical-decay":
        pts = physical_decay_curve(_int_range(args.n_range or "2:30"), cfg)
    elif args.input:
        pts = _read_xy(args.input, args.x, args.y)
    else:
        raise UsageError("fit needs --input FILE or --builtin physical-decay")
    f = fit(FitModel(args.model), pts)
    out.columns = ("model",) + tuple(f.params) + ("residual_norm", "converged")
    out.rows = [(f.model.value, *f.params.values(), f.residual_norm, f.converged)]
    out.extra["points"] = len(pts)
    if args.plot:
        from .plotting import curves_figure

        xs = np.linspace(min(p[0] for p in pts), max(p[0] for p in pts), 200)
        curves_figure(args.plot, {"data": pts}, args.y, logy=False, fits={f.model.value: (xs, f.predict(xs))})


def cmd_verify(args, cfg, out: Output):
    checks = verify_suite(args.suite, args.samples, args.seed, cfg)
    out.meta.append(("seed", args.seed))
    out.columns = ("check", "analytic", "sampled", "stderr", "passed")
    out.rows = [(c.name, c.analytic, c.sampled, c.stderr, c.passed) for c in checks]
    for c in checks:
        print(c.line(), file=sys.stderr)
    return 0 if all(c.passed for c in checks) else 1


def cmd_dump_circuit(args, cfg, out: Output):
    if args.logical:
        programs, _ = build_logical_qft(args.qubits, CodeConfig(args.dc or 3, args.nb, True))
    else:
        programs = build_physical_qft(args.qubits)
    op = OperatingPoint(args.alpha, cfg.op.kappa2_ratio, cfg.op.epsilon_z, cfg.op.g_cnot, Level.MACRO)
    from .model import resolve_operating_point

    op = resolve_operating_point(cfg.pc, op, cfg.options)
    tl = schedule(programs, GateTable(cfg.pc, cfg.mf, op), cfg.options.schedule)
    out.columns = ("qubit", "step", "kind", "start_s", "end_s", "gates")
    doc = []
    for q, ivs in enumerate(tl.step_intervals()):
        prog = tl.programs[q]
        doc.append({"qubit": prog.qubit_index, "data_qubits": prog.data_qubits,
                    "segment_marks": list(prog.segment_marks),
                    "steps": [{"kind": iv.gate.kind.value, "start_s": float(iv.start), "end_s": float(iv.end),
                               "trigger": iv.gate.trigger,
                               "layers": [[(g.label(), c) for g, c in L.ops] for L in iv.gate.layers],
                               "repeat": iv.gate.repeat} for iv in ivs]})
        for k, iv in enumerate(ivs):
            gates = ";".join(f"{g.label()}x{c}" for L in iv.gate.layers for g, c in L.ops)
            if iv.gate.repeat > 1:
                gates = f"({gates})^{iv.gate.repeat}"
            out.rows.append((prog.qubit_index, k, iv.gate.kind.value, float(iv.start), float(iv.end), gates))
    out.extra["total_duration_s"] = float(tl.total_duration)
    if args.json:
        out.extra["programs"] = doc


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="catwatt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"catwatt {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (default: $CATWATT_CONFIG or the bundled sample)")
    common.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--plot", help="also render a figure to this path (png/pdf/svg)")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--alpha", type=float, default=3.0)
    grid.add_argument("--eps-range", default="0.5,40.5", help="epsilon_z/2pi range in MHz")
    grid.add_argument("--kappa-range", default="100,50000", help="kappa2/kappa1 range")

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--fidelity", type=float, default=0.9, help="last-qubit fidelity floor")
    opt.add_argument("--fix", help="restrict the code, e.g. dc=5,nb=1")
    opt.add_argument("--resolution", type=int, default=81, help="points per continuous axis")
    opt.add_argument("--workers", type=int, default=1)

    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("heatmap", parents=[common, grid], help="energy/fidelity over (epsilon_z, kappa2)")
    h.add_argument("--qubits", type=int, required=True)
    h.add_argument("--level", default="both", choices=["micro", "macro", "both"])
    h.add_argument("--grid", default="41", help="N or RxC")
    h.add_argument("--logical", action="store_true")
    h.add_argument("--dc", type=int)
    h.add_argument("--nb", type=int)
    h.set_defaults(func=cmd_heatmap)

    s = sub.add_parser("scaling", parents=[common, grid, opt], help="optimized energy versus qubit count")
    s.add_argument("--n-range", default="2:50")
    s.add_argument("--level", default="both", choices=["micro", "macro", "both", "billed"])
    s.set_defaults(func=cmd_scaling)

    o = sub.add_parser("optimize", parents=[common, grid, opt], help="minimum energy at one qubit count")
    o.add_argument("--qubits", type=int, required=True)
    o.add_argument("--level", default="both", choices=["micro", "macro", "both"])
    o.set_defaults(func=cmd_optimize)

    c = sub.add_parser("compare", parents=[common, grid, opt], help="quantum vs classical FFT")
    c.add_argument("--mode", default="energy", choices=["energy", "time"])
    c.add_argument("--machine", default="kairos")
    c.add_argument("--level", default="macro", choices=["micro", "macro"])
    c.add_argument("--optimize", default="full", choices=["full", "fixed"])
    c.add_argument("--n-range", default="2:50")
    c.set_defaults(func=cmd_compare)

    f = sub.add_parser("fit", parents=[common], help="fit a scaling model to x,y data")
    f.add_argument("--model", default="power_law", choices=[m.value for m in FitModel])
    f.add_argument("--input", help="CSV with a header row")
    f.add_argument("--x", default="n")
    f.add_argument("--y", default="energy_j")
    f.add_argument("--builtin", choices=["physical-decay"], help="regenerate a built-in data set instead")
    f.add_argument("--n-range")
    f.set_defaults(func=cmd_fit)

    v = sub.add_parser("verify", parents=[common], help="Monte-Carlo and enumeration cross-checks")
    v.add_argument("--suite", default="all", choices=["all", "channel", "code", "program"])
    v.add_argument("--samples", type=int, default=1_000_000)
    v.add_argument("--seed", type=int, default=12345)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("dump-circuit", parents=[common], help="programs and timeline as CSV/JSON")
    d.add_argument("--qubits", type=int, required=True)
    d.add_argument("--alpha", type=float, default=3.0)
    d.add_argument("--logical", action="store_true")
    d.add_argument("--dc", type=int)
    d.add_argument("--nb", type=int)
    d.set_defaults(func=cmd_dump_circuit)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        path = args.config or os.environ.get("CATWATT_CONFIG") or str(default_config_path())
        cfg = load_config(path)
        out = Output(args, dump_config(cfg))
        code = args.func(args, cfg, out) or 0
        text = out.render()
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return code
    except (ConfigError, UsageError, ValueError) as e:
        if args.json:
            err = {"error": type(e).__name__, "message": str(e)}
            if isinstance(e, ConfigError):
                err["key"] = e.key
            print(json.dumps(err), file=sys.stderr)
        else:
            print(f"catwatt: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
