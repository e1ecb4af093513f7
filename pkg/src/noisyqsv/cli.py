"""Command-line entry point: ``noisyqsv <command> CONFIG [--seed S] [--out DIR]``.

JSON goes to ``DIR/<command>.json`` (stdout without ``--out``); tables go to
``DIR/<command>.csv`` and are written only when ``--out`` is given.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import hypothesis, sim, spectral, worstcase
from .config import ConfigError, dumps, load_config
from .noise import NoiseError
from .states import InvalidStabilizerGroup

DEFAULT_CURVE_EPS = tuple(float(e) for e in np.geomspace(3e-3, 3e-2, 8))


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _emit(args, payload: dict, rows: list[dict] | None = None):
    text = dumps({"command": args.command, **payload})
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{args.command}.json").write_text(text)
    if rows is not None:
        (out / f"{args.command}.csv").write_text(to_csv(rows))


def cmd_analyze(cfg, args):
    inst = cfg.instance()
    report = spectral.analyze(inst.omega, inst.psi)
    payload = {
        "target": inst.name,
        "n": inst.n,
        "spectrum": report.to_dict(),
        "trace": float(np.trace(inst.omega).real),
        "trace_condition": spectral.trace_condition(inst.omega, report.lambda_prime, inst.n),
    }
    vals, _ = spectral.spectrum(inst.omega)
    _emit(args, payload, [{"index": i, "eigenvalue": float(v)} for i, v in enumerate(vals)])


def cmd_plan(cfg, args):
    inst = cfg.instance()
    report = spectral.analyze(inst.omega, inst.psi)
    if report.distinguishable:
        plan = hypothesis.plan(report.lambda0, report.nu, cfg.epsilon, cfg.delta, cfg.q_prior, N=cfg.N)
        chernoff = hypothesis.chernoff_sample_complexity(report.lambda0, report.nu, cfg.epsilon, cfg.delta)
    else:
        plan = worstcase.nondistinguishable_plan(inst.omega, inst.psi, cfg.epsilon, cfg.delta, cfg.q_prior)
        chernoff = None
    _emit(args, {"distinguishable": report.distinguishable, "plan": plan.to_dict(), "N_chernoff": chernoff})


def cmd_threshold(cfg, args):
    inst = cfg.instance()
    result = worstcase.infidelity_threshold(inst.omega, inst.psi)
    grid = cfg.epsilons or tuple(float(e) for e in np.linspace(0, 1, 101))
    rows = [r.row() for r in worstcase.p_curve(inst.omega, inst.psi, grid)]
    _emit(args, {"threshold": result.to_dict(), "max_gap": max(r["gap"] for r in rows)}, rows)


def cmd_simulate(cfg, args):
    inst = cfg.instance()
    summary = sim.simulate_confidence(cfg, inst)
    rows = None
    payload = {"summary": summary.to_dict()}
    if cfg.sweep_eta:
        rows = [p.row() for p in sim.noise_sweep(cfg, cfg.sweep_eta)]
        payload["sweep"] = rows
    _emit(args, payload, rows)


def cmd_histogram(cfg, args):
    h = sim.histogram(cfg)
    payload = {
        "N": h.N,
        "f_prime": h.f_prime,
        "f_h0": [float(f) for f in h.f_h0],
        "f_h1": [float(f) for f in h.f_h1],
        "mean_h0": float(np.mean(h.f_h0)),
        "mean_h1": float(np.mean(h.f_h1)),
    }
    _emit(args, payload, h.rows())


def cmd_curve(cfg, args):
    if "lambda0" in cfg.extra and "nu" in cfg.extra:
        lam0, nu = float(cfg.extra["lambda0"]), float(cfg.extra["nu"])
    else:
        inst = cfg.instance()
        report = spectral.analyze(inst.omega, inst.psi)
        lam0, nu = report.lambda0, report.nu
        if lam0 >= 1 - 1e-12:
            lam0 = 1.0
    table = sim.n_vs_epsilon_curve(lam0, nu, cfg.deltas, cfg.epsilons or DEFAULT_CURVE_EPS)
    _emit(args, {"lambda0": lam0, "nu": nu, **table.to_dict()}, table.rows)


COMMANDS = {
    "analyze": (cmd_analyze, "spectrum and distinguishability of the noisy strategy"),
    "plan": (cmd_plan, "threshold frequency and sample complexity"),
    "threshold": (cmd_threshold, "worst-case pass probability curve and infidelity threshold"),
    "simulate": (cmd_simulate, "Monte Carlo confidence experiment (optional noise sweep)"),
    "histogram": (cmd_histogram, "pass-frequency histograms under H0 and H1"),
    "curve": (cmd_curve, "sample complexity against infidelity"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisyqsv", description="Quantum state verification under readout noise.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output directory (default: JSON to stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_(seed=args.seed)
        COMMANDS[args.command][0](cfg, args)
    except (
        ConfigError,
        NoiseError,
        InvalidStabilizerGroup,
        worstcase.NotVerifiableError,
        hypothesis.InfeasibleError,
        OSError,
        ValueError,
    ) as exc:
        print(f"noisyqsv {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
