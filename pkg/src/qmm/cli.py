"""Command line front end: ``qmm run | sweep | oracle | classify``.

Exit status is 0 on success, 2 when an input is rejected and 3 when the
integrator reports a loss of accuracy.
"""

from __future__ import annotations

import argparse
import itertools
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import oracle
from .errors import AccuracyError, DegenerateInputError, DomainError, PoleError, QMMError, ValidationError
from .hamiltonians import CouplingSet
from .integrator import ENGINES, REPRESENTATIONS, RunConfig, Trajectory, simulate, simulate_with_custom_history
from .observables import (DEFAULT_SETTINGS, ClassifierSettings, InsufficientDataError, ObservableSeries,
                          PhaseLabel, SeriesAnalysis, analyse_series, config_with_value, extract_series,
                          in_plane_rate)
from .runcard import (SERIES_COLUMNS, TWO_DELAY_COLUMNS, RunCard, SweepAxis, load_run_card, parse_axis,
                      parse_window)
from .svgplot import line_plot_svg

EXIT_OK, EXIT_FAILURE, EXIT_VALIDATION, EXIT_ACCURACY = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# CSV


def write_series_csv(path: Path, series: ObservableSeries, columns: Sequence[str]) -> None:
    """Dot-decimal CSV with a header row; NaN marks samples whose memory lies in the pool."""
    data = np.column_stack([getattr(series, c) for c in columns])
    np.savetxt(path, data, fmt="%.12g", delimiter=",", header=",".join(columns), comments="")


def read_series_csv(path: Path, a: float) -> ObservableSeries:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text:
        raise ValidationError(f"{path}: empty file")
    header = [h.strip() for h in text[0].split(",")]
    missing = [c for c in SERIES_COLUMNS if c not in header]
    if missing:
        raise ValidationError(f"{path}: missing columns {missing}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    cols = {name: data[:, k] for k, name in enumerate(header)}
    extra = {c: cols[c] for c in TWO_DELAY_COLUMNS if c in cols}
    return ObservableSeries(a=a, **{c: cols[c] for c in SERIES_COLUMNS}, **extra)


# ---------------------------------------------------------------------------
# phase report


def _describe_config(cfg: RunConfig) -> list[str]:
    c = cfg.couplings
    nonzero = {k: v for k, v in vars(c).items() if k != "b_ext" and v != 0.0}
    if any(c.b_ext):
        nonzero["b_ext"] = c.b_ext
    coup = ", ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in nonzero.items())
    return [
        f"model            {cfg.model}",
        f"couplings        {coup or 'none'}",
        f"a                {cfg.a:g}",
        f"r                {cfg.r:g}",
        f"theta0, phi0     {cfg.theta0:g}, {cfg.phi0:g}",
        f"t_end            {cfg.t_end_in_a:g} a",
        f"dt               a/{cfg.steps_per_a}",
        f"engine           {cfg.engine} ({cfg.representation})",
    ]


def format_report(cfg: Optional[RunConfig], analysis: SeriesAnalysis, a: float,
                  traj: Optional[Trajectory] = None, card: Optional[RunCard] = None) -> str:
    lines = ["# phase report", ""]
    if cfg is not None:
        lines += _describe_config(cfg)
    if traj is not None:
        lines.append(f"max step drift   {traj.max_step_drift:.3e}")
    rep = analysis.report
    lines += ["", f"final label      {rep.final.value}"]
    ev = analysis.transition
    if ev is None:
        lines.append("transition       none")
    else:
        lines.append(f"transition       {ev.from_label.short} -> {ev.to_label.short} at "
                     f"t = {ev.t_transition / a:.1f} a")
    if card is not None:
        exp = card.expect
        if exp.label is not None:
            lines.append(f"expected label   {exp.label.short} ({'match' if exp.label == rep.final else 'MISMATCH'})")
        if exp.transition is not None:
            lo, hi = exp.transition_in_a or (0.0, math.inf)
            ok = (ev is not None and (ev.from_label, ev.to_label) == exp.transition
                  and lo <= ev.t_transition / a <= hi)
            lines.append(f"expected trans.  {exp.transition[0].short} -> {exp.transition[1].short} "
                         f"in [{lo:g}, {hi:g}] a ({'match' if ok else 'MISMATCH'})")
    counts = rep.counts()
    lines.append("label counts     " + ", ".join(f"{k.short}:{v}" for k, v in sorted(counts.items())))
    lines += ["", "# stationary windows (after burn-in)",
              "index,t_start_in_a,t_end_in_a,label,mean_w2,std_w2,amplitude,period_in_a"]
    for f, lab in zip(rep.features, rep.labels):
        period = "" if f.dominant_period is None else f"{f.dominant_period / a:.4g}"
        lines.append(f"{f.index},{f.t_start / a:.2f},{f.t_end / a:.2f},{lab.short},{f.mean_w2:.6g},"
                     f"{f.std_w2:.3e},{f.component_amplitude:.4g},{period}")
    lines += ["", "# whole-run labels used for transition detection",
              "t_start_in_a,label"]
    lines += [f"{t / a:.2f},{lab.short}" for t, lab in zip(analysis.run_window_starts, analysis.run_labels)]
    return "\n".join(lines) + "\n"


def _analyse(series: ObservableSeries, settings: ClassifierSettings) -> Optional[SeriesAnalysis]:
    try:
        return analyse_series(series, settings)
    except InsufficientDataError:
        return None


def _settings(args) -> ClassifierSettings:
    if getattr(args, "window_in_a", None):
        return replace(DEFAULT_SETTINGS, window_in_a=args.window_in_a,
                       stride_in_a=min(DEFAULT_SETTINGS.stride_in_a, args.window_in_a))
    return DEFAULT_SETTINGS


# ---------------------------------------------------------------------------
# verbs


def _card_with_overrides(args) -> RunCard:
    card = load_run_card(args.card)
    changes = {}
    for key in ("dt_in_a", "engine", "representation", "t_end_in_a"):
        value = getattr(args, key, None)
        if value is not None:
            changes[key] = value
    if changes:
        card = replace(card, config=card.config.with_(**changes))
    if getattr(args, "windows", None):
        card = replace(card, windows=tuple(parse_window(w) for w in args.windows.split(",")))
    return card


def write_plots(out: Path, series: ObservableSeries, card: RunCard, stem: str = "plot") -> list[Path]:
    a = series.a
    windows = card.windows or ((0.0, float(series.t[-1] / a)),)
    written = []
    for lo, hi in windows:
        m = (series.t >= lo * a - 1e-9) & (series.t <= hi * a + 1e-9)
        if m.sum() < 2:
            continue
        curves = {name: getattr(series, name)[m] for name in card.plots if getattr(series, name) is not None}
        svg = line_plot_svg(series.t[m] / a, curves, title=f"{card.name or card.config.model}  [{lo:g} a, {hi:g} a]",
                            x_label="t / a")
        path = out / f"{stem}_{lo:g}_{hi:g}.svg"
        path.write_text(svg, encoding="utf-8")
        written.append(path)
    return written


def cmd_run(args) -> int:
    card = _card_with_overrides(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    traj = simulate(card.config)
    series = extract_series(traj)
    write_series_csv(out / "series.csv", series, card.series_columns)
    analysis = _analyse(series, _settings(args))
    if analysis is None:
        (out / "phase_report.txt").write_text(
            "# phase report\n\n" + "\n".join(_describe_config(card.config))
            + "\n\nfinal label      Undecided (run too short for three windows)\n", encoding="utf-8")
        print("final label: Undecided (run too short for three windows)")
    else:
        report = format_report(card.config, analysis, traj.a, traj, card)
        (out / "phase_report.txt").write_text(report, encoding="utf-8")
        print(f"final label: {analysis.report.final.value}")
        ev = analysis.transition
        if ev is not None:
            print(f"transition: {ev.from_label.short} -> {ev.to_label.short} at t = {ev.t_transition / traj.a:.1f} a")
    if not args.no_plots:
        write_plots(out, series, card)
    print(f"max step drift: {traj.max_step_drift:.3e}")
    print(f"outputs written to {out}")
    return EXIT_OK


def sweep_grid(axes: Sequence[SweepAxis]) -> list[tuple[float, ...]]:
    if not 1 <= len(axes) <= 2:
        raise ValidationError("a sweep needs one or two axes")
    return list(itertools.product(*(ax.values for ax in axes)))


def run_sweep(card: RunCard, axes: Sequence[SweepAxis], settings: ClassifierSettings = DEFAULT_SETTINGS,
              max_workers: Optional[int] = None,
              runner: Callable[[RunConfig], Trajectory] = simulate) -> list[dict]:
    """One row per grid point, in grid order; a failing point yields a row marked ``failed``."""
    grid = sweep_grid(axes)
    cfgs = []
    for point in grid:
        cfg = card.config
        for ax, v in zip(axes, point):
            cfg = config_with_value(cfg, ax.name, v)
        cfgs.append(cfg)

    def one(cfg: RunConfig) -> dict:
        row = {"status": "ok", "label": "", "transition": "", "t_transition_in_a": "",
               "mean_w2": "", "std_w2": "", "max_step_drift": "", "error": ""}
        try:
            traj = runner(cfg)
            series = extract_series(traj)
            analysis = analyse_series(series, settings)
        except (QMMError, ValueError, ArithmeticError) as exc:
            row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
            return row
        tail = series.w2_at[np.isfinite(series.w2_at)]
        tail = tail[len(tail) // 4:]
        row.update(label=analysis.report.final.short, mean_w2=f"{tail.mean():.6g}",
                   std_w2=f"{tail.std():.3e}", max_step_drift=f"{traj.max_step_drift:.3e}")
        if analysis.transition is not None:
            ev = analysis.transition
            row.update(transition=f"{ev.from_label.short}->{ev.to_label.short}",
                       t_transition_in_a=f"{ev.t_transition / traj.a:.1f}")
        return row

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(one, cfgs))
    rows = []
    for point, res in zip(grid, results):
        row = {ax.name: f"{v:.10g}" for ax, v in zip(axes, point)}
        row.update(res)
        rows.append(row)
    return rows


def write_phase_map(path: Path, rows: Sequence[dict]) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def cmd_sweep(args) -> int:
    card = _card_with_overrides(args)
    axes = [parse_axis(a) for a in args.axis] if args.axis else list(card.axes)
    rows = run_sweep(card, axes, _settings(args), args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_phase_map(out / "phase_map.csv", rows)
    names = [ax.name for ax in axes]
    for row in rows:
        point = " ".join(f"{n}={row[n]}" for n in names)
        status = row["label"] if row["status"] == "ok" else f"failed ({row['error']})"
        extra = f"  {row['transition']} at {row['t_transition_in_a']} a" if row["transition"] else ""
        print(f"{point}: {status}{extra}")
    labels = [r["label"] for r in rows if r["status"] == "ok"]
    if len(axes) == 1:
        for r0, r1 in zip(rows, rows[1:]):
            if r0["status"] == r1["status"] == "ok" and r0["label"] != r1["label"]:
                print(f"crossover bracket: {names[0]} in [{r0[names[0]]}, {r1[names[0]]}] "
                      f"({r0['label']} -> {r1['label']})")
    print(f"{len(labels)}/{len(rows)} points classified; phase map written to {out / 'phase_map.csv'}")
    return EXIT_OK


def cmd_classify(args) -> int:
    card = None
    if args.card:
        card = load_run_card(args.card)
    a = args.a if args.a is not None else (card.config.a if card else None)
    if a is None:
        raise ValidationError("classify needs the delay: pass --a or --card")
    if not a > 0:
        raise ValidationError(f"a must be > 0, got {a}")
    try:
        series = read_series_csv(Path(args.csv), a)
    except OSError as exc:
        raise ValidationError(f"cannot read {args.csv!r}: {exc.strerror or exc}") from None
    analysis = analyse_series(series, _settings(args))
    report = format_report(card.config if card else None, analysis, a, None, card)
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    print(f"final label: {analysis.report.final.value}")
    if analysis.transition is not None:
        ev = analysis.transition
        print(f"transition: {ev.from_label.short} -> {ev.to_label.short} at t = {ev.t_transition / a:.1f} a")
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle front end

_SAFE_NAMES = {k: getattr(math, k) for k in ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh",
                                              "tanh", "atan", "pi", "e")}


def history_from_expression(expr: str) -> Callable[[float], float]:
    """Scalar history ``f(t)`` from an arithmetic expression in ``t`` and :mod:`math` names."""
    try:
        code = compile(expr, "<history>", "eval")
    except SyntaxError as exc:
        raise ValidationError(f"cannot parse history {expr!r}: {exc.msg}") from None
    unknown = set(code.co_names) - set(_SAFE_NAMES) - {"t"}
    if unknown:
        raise ValidationError(f"history {expr!r} uses unknown names {sorted(unknown)}")

    def f(t: float) -> float:
        return float(eval(code, {"__builtins__": {}}, {**_SAFE_NAMES, "t": t}))

    try:
        f(0.0)
    except ArithmeticError as exc:
        raise ValidationError(f"history {expr!r} fails at t = 0: {exc}") from None
    return f


def _in_plane_engine_rate(lambda_im: float, a: float, t_end_in_a: float, f: Callable[[float], float],
                          steps_per_a: int) -> tuple[np.ndarray, np.ndarray]:
    cfg = RunConfig(model="qmm22", couplings=CouplingSet(lambda_im=lambda_im), a=a, t_end_in_a=t_end_in_a,
                    dt_in_a=1.0 / steps_per_a, decimation=1)
    traj = simulate_with_custom_history(cfg, lambda t: (f(t), 0.0))
    return traj.t, in_plane_rate(traj.r, traj.drdt)


def _fmt_roots(values) -> str:
    return ", ".join(f"{v:.6f}" for v in values) or "none"


def cmd_oracle(args) -> int:
    sub = args.oracle_cmd
    if sub == "alpha":
        roots = oracle.alpha_roots(args.lambda_im, args.a)
        print(f"alpha + lambda_im sin(a alpha) = 0 with lambda_im={args.lambda_im:g}, a={args.a:g}")
        for r in roots.roots:
            print(f"  alpha = {r:+.6f}   residual {roots.residual(r):.1e}")
    elif sub == "thresholds":
        print(f"theta-orbit a* = {oracle.theta_orbit_threshold(args.lambda_im):.6g}")
        if args.mu_hat is not None:
            print(f"phi-orbit   a* = {oracle.phi_orbit_threshold(args.lambda_im, args.mu_hat):.6g}")
    elif sub in ("theta-orbit", "exciton"):
        f = history_from_expression(args.history)
        t_end = args.t_end_in_a * args.a
        roots = oracle.alpha_roots(args.lambda_im, args.a)
        if sub == "theta-orbit":
            sol = oracle.solve_theta_orbit(f, args.lambda_im, args.a, t_end, args.steps_per_a)
        else:
            alpha = args.alpha if args.alpha is not None else (roots.nonzero[-1] if roots.nonzero else 0.0)
            sol = oracle.solve_exciton_mode(f, args.lambda_im, args.a, alpha, t_end, args.steps_per_a)
            print(f"exciton about slope alpha = {alpha:.6f}")
        tail = sol.xdot[sol.t >= (args.t_end_in_a - 1.0) * args.a]
        print(f"slope roots: {_fmt_roots(roots.roots)}")
        print(f"mean rate over the last delay interval: {tail.mean():+.6f} "
              f"(spread {np.ptp(tail):.2e})")
        if sub == "theta-orbit":
            near = roots.nearest(tail.mean())
            print(f"nearest root {near:+.6f}, distance {abs(tail.mean() - near):.2e}")
            if args.engine_check:
                te, rate = _in_plane_engine_rate(args.lambda_im, args.a, args.t_end_in_a, f, args.steps_per_a)
                m = te >= args.a
                ref = np.interp(te[m], sol.t, sol.xdot)
                print(f"engine vs oracle max |rate difference| on [a, t_end]: {np.max(np.abs(rate[m] - ref)):.3e}")
        if args.csv:
            np.savetxt(args.csv, np.column_stack([sol.t, sol.x, sol.xdot]), fmt="%.12g", delimiter=",",
                       header="t,x,xdot", comments="")
    elif sub == "gamma":
        roots = oracle.characteristic_gamma_roots(args.lambda_im, args.a, args.alpha, args.resolution, args.bound)
        print(f"gamma roots on grid of resolution {args.resolution:g} in [-{args.bound:g}, {args.bound:g}]: "
              f"{{{_fmt_roots(roots)}}}")
    elif sub == "infancy":
        t1, t2, t3 = oracle.infancy_coefficients(args.theta0, args.theta_b, args.dtheta_b, args.ddtheta_b)
        print(f"theta_hat_1 = {t1:.10g}\ntheta_hat_2 = {t2:.10g}\ntheta_hat_3 = {t3:.10g}")
    elif sub == "hybrid-series":
        ser = oracle.hybrid_near_markovian(args.c1, args.c2, args.lambda_re, args.lambda_im, args.b_z)
        for name, coeffs in (("theta", ser.theta_coeffs), ("phi", ser.phi_coeffs)):
            for n, cs in enumerate(coeffs):
                terms = " + ".join(f"({c:.8g}) t^{k}" for k, c in enumerate(cs) if c != 0.0) or "0"
                print(f"{name}_{n}(t) = {terms}")
        if args.a is not None:
            a = args.a
            cfg = RunConfig(model="hybrid22", couplings=CouplingSet(lambda_re=args.lambda_re,
                            lambda_im=args.lambda_im, b_ext=(0.0, 0.0, args.b_z)),
                            a=a, t_end_in_a=args.t_end_in_a, decimation=1)
            traj = simulate_with_custom_history(
                cfg, lambda s: (float(ser.theta(s - a, a)), float(ser.phi(s - a, a))))
            m = traj.after(a)
            tau = traj.t[m] - a
            err = max(np.max(np.abs(traj.theta[m] - ser.theta(tau, a))),
                      np.max(np.abs(np.unwrap(traj.phi[m]) - ser.phi(tau, a))))
            print(f"engine vs order-2 series, max angle error over [a, {args.t_end_in_a:g} a]: {err:.3e} "
                  f"({err / a**3:.3g} a^3)")
    elif sub == "phi-orbit":
        sol = oracle.phi_orbit_classify(args.lambda_im, args.mu_hat, args.theta0, args.a)
        print(f"category: {sol.category.value}")
        if sol.slope is not None:
            print(f"slope: {sol.slope:+.10g}")
        if sol.delay_phase is not None:
            print(f"delay phase (slope * a mod 2 pi): {sol.delay_phase:.10g}")
            print(f"compatible delays: {_fmt_roots(sol.compatible_delays(3))}")
        if sol.slopes:
            print(f"discrete slopes: {_fmt_roots(sol.slopes)}")
        if not (abs(args.lambda_im) < oracle.EXACT_TOL):
            print(f"phi-orbit threshold a* = {oracle.phi_orbit_threshold(args.lambda_im, args.mu_hat):.6g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _common_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--card", required=True, help="card file, or the name of a shipped card")
    p.add_argument("--out", default="qmm_out", help="output directory (default: qmm_out)")
    p.add_argument("--dt-in-a", dest="dt_in_a", type=float, help="override the step as a fraction of a")
    p.add_argument("--engine", choices=ENGINES)
    p.add_argument("--representation", choices=REPRESENTATIONS)
    p.add_argument("--t-end-in-a", dest="t_end_in_a", type=float, help="override the run length")
    p.add_argument("--windows", help="plot windows in units of a, e.g. '0:50,950:1000'")
    p.add_argument("--window-in-a", dest="window_in_a", type=float,
                   help="classifier window length in units of a (default 50)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmm", description=__doc__.splitlines()[0])
    verbs = parser.add_subparsers(dest="verb", required=True)

    p = verbs.add_parser("run", help="simulate one card and classify it")
    _common_run_flags(p)
    p.add_argument("--no-plots", action="store_true", help="skip SVG output")
    p.set_defaults(func=cmd_run)

    p = verbs.add_parser("sweep", help="classify a grid of runs derived from one card")
    _common_run_flags(p)
    p.add_argument("--axis", action="append",
                   help="NAME=v1,v2,... or NAME=start:stop:count; give at most twice")
    p.add_argument("--workers", type=int, default=None, help="concurrent runs (default: executor choice)")
    p.set_defaults(func=cmd_sweep)

    p = verbs.add_parser("classify", help="classify an existing series CSV")
    p.add_argument("csv")
    p.add_argument("--a", type=float, help="delay used by the run")
    p.add_argument("--card", help="card of the run (supplies a and the expectations)")
    p.add_argument("--out", help="write the phase report here")
    p.add_argument("--window-in-a", dest="window_in_a", type=float)
    p.set_defaults(func=cmd_classify)

    p = verbs.add_parser("oracle", help="closed-form results and reduced solvers")
    p.set_defaults(func=cmd_oracle)
    sub = p.add_subparsers(dest="oracle_cmd", required=True)

    def lam(q, required=True):
        q.add_argument("--lambda-im", "--lambda", dest="lambda_im", type=float, required=required)

    q = sub.add_parser("alpha", help="slopes of linear theta-orbits")
    lam(q)
    q.add_argument("--a", type=float, required=True)
    q = sub.add_parser("thresholds", help="memory-distance thresholds")
    lam(q)
    q.add_argument("--mu-hat", dest="mu_hat", type=float)
    for name, hist in (("theta-orbit", "0.57*t + 7"), ("exciton", "sinh(t)/7")):
        q = sub.add_parser(name, help=f"integrate the reduced {name} delay equation")
        lam(q)
        q.add_argument("--a", type=float, required=True)
        q.add_argument("--history", default=hist, help=f"expression in t (default: {hist!r})")
        q.add_argument("--t-end-in-a", dest="t_end_in_a", type=float, default=30.0)
        q.add_argument("--steps-per-a", dest="steps_per_a", type=int, default=400)
        q.add_argument("--csv", help="write t, x, xdot here")
        if name == "exciton":
            q.add_argument("--alpha", type=float, help="background slope (default: largest root)")
        else:
            q.add_argument("--engine-check", action="store_true",
                           help="also run the full engine and report the rate difference")
    q = sub.add_parser("gamma", help="characteristic roots of linear perturbations")
    lam(q)
    q.add_argument("--a", type=float, required=True)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--resolution", type=float, default=1e-3)
    q.add_argument("--bound", type=float, default=20.0)
    q = sub.add_parser("infancy", help="Taylor coefficients of an infant theta-orbit")
    q.add_argument("--theta0", type=float, required=True)
    q.add_argument("--theta-b", dest="theta_b", type=float, required=True)
    q.add_argument("--dtheta-b", dest="dtheta_b", type=float, default=0.0)
    q.add_argument("--ddtheta-b", dest="ddtheta_b", type=float, default=0.0)
    q = sub.add_parser("hybrid-series", help="second-order small-delay series of the hybrid model")
    q.add_argument("--c1", type=float, required=True)
    q.add_argument("--c2", type=float, default=0.0)
    q.add_argument("--lambda-re", dest="lambda_re", type=float, required=True)
    lam(q)
    q.add_argument("--b-z", dest="b_z", type=float, required=True)
    q.add_argument("--a", type=float, help="also compare against the engine at this delay")
    q.add_argument("--t-end-in-a", dest="t_end_in_a", type=float, default=100.0)
    q = sub.add_parser("phi-orbit", help="category of a constant-theta configuration")
    lam(q)
    q.add_argument("--mu-hat", dest="mu_hat", type=float, required=True)
    q.add_argument("--theta0", type=float, required=True)
    q.add_argument("--a", type=float)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AccuracyError, PoleError) as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (ValidationError, DomainError, DegenerateInputError, InsufficientDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (QMMError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
