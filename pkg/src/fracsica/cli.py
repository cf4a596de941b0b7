"""Command-line front end.

    fracsica simulate   --config morocco.ini [--out DIR] [--dump-config]
    fracsica focp       --config morocco.ini [--out DIR] [--dump-config]
    fracsica hypotheses --config morocco.ini [--out DIR] [--dump-config]

Exit codes: 0 success, 1 configuration error, 2 solver failure,
3 finished with warnings (a sweep did not converge).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import focp as fc
from . import metrics, sica
from .config import ScenarioConfig, dump_config, load_config
from .exceptions import ConfigError, FracSicaError, UndefinedMeasureError

log = logging.getLogger("fracsica")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_WARNINGS = 3

OUTPUT_ENV = "FRACSICA_OUTPUT_DIR"
FLOAT_FMT = "%.12g"


def _alpha_tag(alpha: float) -> str:
    return f"alpha_{alpha:g}"


def _state_dict(state):
    return None if state is None else dict(zip("SICA", map(float, state)))


def _write_csv(path: Path, columns, header):
    np.savetxt(path, np.column_stack(columns), fmt=FLOAT_FMT, delimiter=",",
               header=",".join(header), comments="")


def _write_json(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")


def uncontrolled_peak(cfg: ScenarioConfig) -> float:
    """max_t I(t) of the uncontrolled classical (alpha = 1) run on the scenario grid."""
    m = cfg.model
    traj = sica.simulate(m.params, m.incidence(), m.initial_state, 1.0, cfg.solver.grid())
    return float(traj.values[:, 1].max())


def resolve_delta(cfg: ScenarioConfig) -> float:
    return uncontrolled_peak(cfg) if cfg.focp.delta == "auto" else float(cfg.focp.delta)


def run_simulate(cfg: ScenarioConfig, out_dir: Path) -> dict:
    m = cfg.model
    inc = m.incidence()
    grid = cfg.solver.grid()
    r0 = sica.basic_reproduction_number(m.params, inc)
    dfe = sica.disease_free_equilibrium(m.params)
    ee = sica.endemic_equilibrium(m.params, inc)
    out_dir.mkdir(parents=True, exist_ok=True)

    runs, stability = [], []
    peak_alpha1 = None
    for alpha in cfg.solver.alphas:
        traj = sica.simulate(m.params, inc, m.initial_state, alpha, grid)
        max_i = float(traj.values[:, 1].max())
        if alpha == 1.0:
            peak_alpha1 = max_i
        name = f"simulate_{_alpha_tag(alpha)}.csv"
        if "csv" in cfg.output.formats:
            _write_csv(out_dir / name, [traj.t, *traj.values.T], ["t", "S", "I", "C", "A"])
        runs.append({"alpha": alpha, "csv": name if "csv" in cfg.output.formats else None,
                     "max_I": max_i, "final_state": _state_dict(traj.final)})
        stability.append({
            "alpha": alpha,
            "disease_free": sica.stability_at(m.params, inc, dfe, alpha).to_dict(),
            "endemic": None if ee is None else sica.stability_at(m.params, inc, ee, alpha).to_dict(),
        })

    summary = {
        "command": "simulate",
        "R0": r0,
        "disease_free_equilibrium": _state_dict(dfe),
        "endemic_equilibrium": _state_dict(ee),
        "delta_candidate": peak_alpha1 if peak_alpha1 is not None else uncontrolled_peak(cfg),
        "grid": {"t0": grid.t0, "tf": grid.tf, "n_steps": grid.n_steps},
        "runs": runs,
        "stability": stability,
    }
    if "json" in cfg.output.formats:
        _write_json(out_dir / "summary.json", summary)
    return summary


def run_focp(cfg: ScenarioConfig, out_dir: Path) -> dict:
    m = cfg.model
    f = cfg.focp
    inc = m.incidence()
    grid = cfg.solver.grid()
    delta = resolve_delta(cfg)
    weights = fc.CostWeights(f.B1, f.B2, delta)
    bounds = fc.ControlBounds(f.v1_max, f.v2_max)
    sweep = fc.SweepConfig(f.max_iterations, f.tolerance, f.relaxation)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for alpha in cfg.solver.alphas:
        sol = fc.forward_backward_sweep(m.params, inc, m.initial_state, alpha, grid,
                                        weights, bounds, sweep)
        av = metrics.averted_cases(sol)
        tc = metrics.total_cost(sol, f.C1, f.C2)
        try:
            ratio = metrics.acer(tc, av)
        except UndefinedMeasureError:
            ratio = None
        eff_curve = metrics.efficacy_curve(sol)
        if "csv" in cfg.output.formats:
            _write_csv(out_dir / f"focp_{_alpha_tag(alpha)}.csv",
                       [sol.states.t, *sol.states.values.T, sol.controls.v1, sol.controls.v2,
                        eff_curve],
                       ["t", "S", "I", "C", "A", "v1", "v2", "F"])
        rows.append({
            "alpha": alpha,
            "AV": av,
            "TC": tc,
            "ACER": ratio,
            "effectiveness": metrics.effectiveness(sol),
            "J": sol.cost,
            "iterations": sol.iterations,
            "converged": sol.converged,
        })

    table = {
        "command": "focp",
        "delta": delta,
        "delta_source": "auto" if f.delta == "auto" else "config",
        "weights": {"B1": f.B1, "B2": f.B2, "C1": f.C1, "C2": f.C2},
        "bounds": {"v1_max": f.v1_max, "v2_max": f.v2_max},
        "grid": {"t0": grid.t0, "tf": grid.tf, "n_steps": grid.n_steps},
        "rows": rows,
    }
    if "json" in cfg.output.formats:
        _write_json(out_dir / "cost_effectiveness.json", table)
    return table


def run_hypotheses(cfg: ScenarioConfig, out_dir: Path, stream=None) -> dict:
    m = cfg.model
    inc = m.incidence()
    s_max = m.params.Lambda / m.params.mu
    ee = sica.endemic_equilibrium(m.params, inc) if _h123_hold(inc, s_max) else None
    i_star = None if ee is None else ee.I
    report = sica.check_hypotheses(inc, s_max, s_max, i_star=i_star)
    payload = {
        "command": "hypotheses",
        "incidence": {"kind": m.incidence_kind, "params": dict(m.incidence_params)},
        "i_star": i_star,
        "report": report.to_dict(),
    }
    stream = stream or sys.stdout
    for name, res in report.results.items():
        status = {True: "pass", False: "FAIL", None: "n/a"}[res.passed]
        line = f"{name}: {status:4s}  {res.note}"
        if res.witness is not None:
            line += f"  witness (S, I) = ({res.witness[0]:.6g}, {res.witness[1]:.6g})"
        print(line, file=stream)
    if "json" in cfg.output.formats:
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_json(out_dir / "hypotheses.json", payload)
    return payload


def _h123_hold(inc, s_max) -> bool:
    rep = sica.check_hypotheses(inc, s_max, s_max, density=50)
    return all(rep[h].passed for h in ("H1", "H2", "H3"))


def _output_dir(args, cfg: ScenarioConfig) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return Path(cfg.output.directory)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracsica", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log sweep progress")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in [("simulate", "uncontrolled trajectories, R0, equilibria, stability"),
                        ("focp", "optimal-control sweeps and cost-effectiveness table"),
                        ("hypotheses", "lattice check of the incidence hypotheses H1-H4")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True,
                       help="scenario file, or the name of a bundled scenario (e.g. morocco)")
        p.add_argument("--out", help=f"output directory (overrides ${OUTPUT_ENV} and the config)")
        p.add_argument("--dump-config", action="store_true",
                       help="print the parsed configuration in canonical form and exit")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dump_config:
        sys.stdout.write(dump_config(cfg))
        return EXIT_OK

    out_dir = _output_dir(args, cfg)
    try:
        if args.command == "simulate":
            run_simulate(cfg, out_dir)
        elif args.command == "hypotheses":
            run_hypotheses(cfg, out_dir)
        else:
            if not cfg.focp.enabled:
                print("config error: [focp] enabled = false", file=sys.stderr)
                return EXIT_CONFIG
            table = run_focp(cfg, out_dir)
            if not all(row["converged"] for row in table["rows"]):
                print("warning: at least one sweep did not converge", file=sys.stderr)
                return EXIT_WARNINGS
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FracSicaError, ValueError) as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
