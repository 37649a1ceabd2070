"""Command-line entry points: closed-form kernel evaluation, simulation,
oracle cross-checks, inequality verification, and experiment recipes."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np


def _fmt(v):
    return f"{float(v):.17g}"


def _cmd_kernel_eval(args):
    from .kernels import (
        EnvelopeParams,
        KernelQuery,
        envelope_A,
        envelope_A1,
        envelope_A2,
        envelope_A3,
        grad_green_couette,
        green_c_parabolic,
        green_couette_2d,
        green_couette_3d,
        wave_scriptW,
        yukawa,
    )

    which = args.which
    if which in ("g3", "g2", "grad", "gc1"):
        q = KernelQuery(x=args.x, y=args.y, z=args.z, t=args.t,
                        y0=args.y0, A=args.A)
        if which == "g3":
            vals = [green_couette_3d(q)]
        elif which == "g2":
            vals = [green_couette_2d(q)]
        elif which == "gc1":
            vals = [green_c_parabolic(q)]
        else:
            vals = list(grad_green_couette(q))
    elif which == "yukawa":
        r = math.sqrt(args.x**2 + args.y**2 + args.z**2)
        vals = [yukawa(r)]
    elif which == "scriptW":
        vals = [wave_scriptW(args.x, args.y, args.z, args.t,
                             args.Cprime, args.Cdblprime, args.A)]
    else:  # envA family
        p = EnvelopeParams(A=args.A, theta=args.theta, gamma=args.gamma)
        fn = {
            "envA": lambda: envelope_A(args.t, p),
            "envA1": lambda: envelope_A1(args.t, p),
            "envA2": lambda: envelope_A2(args.t, p),
            "envA3": lambda: envelope_A3(args.t, args.alpha, p),
        }[which]
        vals = [fn()]
    for v in vals:
        print(_fmt(v))
    return 0


def _cmd_simulate(args):
    from .config import load_config
    from .solver import run

    cfg = load_config(args.config)
    res = run(cfg, args.out)
    print(
        f"t_reached={res.state.t:.10g} steps={res.state.steps} "
        f"blowup={int(res.blowup)}"
        + (f" blowup_time={res.blowup_time:.10g}" if res.blowup else "")
    )
    return 0


def _oracle_rows(cfg, times, fields):
    from .solver import Grid, SimState, diagnostics_row

    grid = Grid(cfg.box, cfg.resolution)
    rows = []
    for t, vals in zip(times, fields):
        st = SimState(cfg=cfg, grid=grid, n=vals, c=None, t=float(t), S=0.0)
        rows.append(diagnostics_row(st))
    return rows


def _cmd_oracle(args):
    from .config import load_config
    from .fields import Field, write_snapshot
    from .oracle import picard_solve, propagate_linear
    from .solver import format_diagnostics, initial_state, origin_of

    cfg = load_config(args.config)
    st = initial_state(cfg)
    f0 = Field(st.n.copy(), st.grid.spacing, origin_of(cfg), time=0.0)
    if args.mode == "linear":
        out_field = propagate_linear(f0, cfg.t_final, cfg.A)
        times = [0.0, cfg.t_final]
        fields = [f0.values, out_field.values]
        extra = {"mode": "linear"}
    else:
        res = picard_solve(f0, st.c_field(), cfg, cfg.t_final)
        keep = range(0, len(res.times), max(cfg.diag_every, 1))
        idx = sorted(set(keep) | {len(res.times) - 1})
        times = [res.times[i] for i in idx]
        fields = [res.n_traj[i] for i in idx]
        out_field = res.final_n(f0)
        extra = {
            "mode": "picard",
            "iterations": res.iterations,
            "error_estimate": res.error_estimate,
        }
    rows = _oracle_rows(cfg, times, fields)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "diagnostics.csv").write_text(format_diagnostics(rows))
        write_snapshot(out_field, out / "snapshot_final", cfg.A, cfg.epsilon,
                       frame="lab")
        summary = {
            "A": cfg.A, "epsilon": cfg.epsilon, "t_final": cfg.t_final,
            "final_linf": rows[-1]["linf"], **extra,
        }
        (out / "summary.json").write_text(json.dumps(summary, indent=1))
    print(f"mode={args.mode} t={times[-1]:.10g} linf={rows[-1]['linf']:.10g}")
    return 0


def _cmd_verify_lemmas(args):
    from .lemmas import verify_lemma, write_report_csv, write_report_json

    grid = None
    if args.grid:
        grid = json.loads(Path(args.grid).read_text())
    rep = verify_lemma(args.lemma, grid)
    out = Path(args.out)
    write_report_csv(rep, out)
    write_report_json(rep, out.with_suffix(".json"))
    print(
        f"{rep.check}: {'PASS' if rep.passed else 'FAIL'} "
        f"sup_ratio={rep.sup_ratio:.6g} cases={len(rep.cases)}"
    )
    return 0


def _cmd_sweep(args):
    from .experiments import load_sweep_spec, suppression_sweep

    spec = load_sweep_spec(args.spec)
    out = suppression_sweep(spec, parallel=not args.serial,
                            reuse_existing=args.reuse)
    for row in out["rows"]:
        bt = row["blowup_time"]
        print(
            f"value={row['value']:g} blowup={int(row['blowup'])}"
            + (f" trigger={bt:.6g}" if bt is not None else
               f" final_linf={row['final_linf']:.6g}")
        )
    fs = out["first_success"]
    print(f"first_success={'none' if fs is None else f'{fs:g}'}")
    return 0


def _cmd_fit(args):
    from .experiments import decay_fit

    rep = decay_fit(args.run, t_min=args.t_min, horizon=args.horizon,
                    margin=args.margin)
    print(json.dumps(rep, indent=1))
    return 0


def _cmd_compare(args):
    from .config import load_config
    from .experiments import pp_vs_pe

    cfg_pp = load_config(Path(args.pp) / "config.txt")
    cfg_pe = load_config(Path(args.pe) / "config.txt")
    res = pp_vs_pe(cfg_pe, cfg_pp, out_dir=args.out)
    last = res["rows"][-1]
    print(
        f"t={last['t']:.6g} n_gap={last['n_gap']:.6g} "
        f"c_ratio_pe={last['c_ratio_pe']:.6g} c_ratio_pp={last['c_ratio_pp']:.6g}"
    )
    for w in res["warnings_pp"]:
        print(f"warning: {w}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="couetteks",
        description="Chemotaxis-in-shear simulation and verification lab",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    kp = sub.add_parser("kernel", help="closed-form kernel evaluation")
    ksub = kp.add_subparsers(dest="kernel_command", required=True)
    ke = ksub.add_parser("eval", help="evaluate one kernel/envelope value")
    ke.add_argument("--x", type=float, default=0.0)
    ke.add_argument("--y", type=float, default=0.0)
    ke.add_argument("--z", type=float, default=0.0)
    ke.add_argument("--t", type=float, default=1.0)
    ke.add_argument("--y0", type=float, default=0.0)
    ke.add_argument("--A", type=float, default=0.0)
    ke.add_argument("--theta", type=float, default=0.8)
    ke.add_argument("--gamma", type=float, default=0.5)
    ke.add_argument("--alpha", type=float, default=1.75)
    ke.add_argument("--Cprime", type=float, default=60.0)
    ke.add_argument("--Cdblprime", type=float, default=60.0)
    ke.add_argument(
        "--which", required=True,
        choices=["g3", "g2", "grad", "gc1", "yukawa", "scriptW",
                 "envA", "envA1", "envA2", "envA3"],
    )
    ke.set_defaults(func=_cmd_kernel_eval)

    sp = sub.add_parser("simulate", help="run the spectral solver")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_simulate)

    op = sub.add_parser("oracle", help="slow quadrature reference solution")
    op.add_argument("--mode", choices=["linear", "picard"], required=True)
    op.add_argument("--config", required=True)
    op.add_argument("--out", default=None)
    op.set_defaults(func=_cmd_oracle)

    vp = sub.add_parser("verify-lemmas", help="run one inequality check")
    vp.add_argument("--lemma", required=True)
    vp.add_argument("--grid", default=None, help="JSON file of grid overrides")
    vp.add_argument("--out", required=True, help="per-case CSV path")
    vp.set_defaults(func=_cmd_verify_lemmas)

    wp = sub.add_parser("sweep", help="parameter sweep of simulations")
    wp.add_argument("--spec", required=True, help="JSON sweep spec")
    wp.add_argument("--serial", action="store_true")
    wp.add_argument("--reuse", action="store_true",
                    help="skip members with existing diagnostics")
    wp.set_defaults(func=_cmd_sweep)

    fp = sub.add_parser("fit", help="late-time decay-rate fit of a run")
    fp.add_argument("--run", required=True)
    fp.add_argument("--t-min", type=float, default=2.0)
    fp.add_argument("--horizon", type=float, default=10.0)
    fp.add_argument("--margin", type=float, default=0.3)
    fp.set_defaults(func=_cmd_fit)

    cp = sub.add_parser("compare", help="parabolic vs elliptic chemoattractant")
    cp.add_argument("--pp", required=True, help="run dir of the epsilon=1 config")
    cp.add_argument("--pe", required=True, help="run dir of the epsilon=0 config")
    cp.add_argument("--out", default=None)
    cp.set_defaults(func=_cmd_compare)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # faults exit nonzero; outcomes exit zero
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
