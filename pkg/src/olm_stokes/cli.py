"""Command line entry point ``olm-stokes``."""

import argparse
import logging
import sys

import numpy as np

from .experiments import CONDITION_PAIRS, L_SWEEP, ExperimentConfig, run_condition, run_convergence, run_infsup, run_solve


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def build_parser():
    parser = argparse.ArgumentParser(prog="olm-stokes", description="Stokes flow on overlapping meshes with Nitsche coupling")
    parser.add_argument("subcommand", choices=("convergence", "condition", "infsup", "solve"))
    parser.add_argument("--levels", type=int, default=4, help="refinement levels (convergence) or level to solve (solve)")
    parser.add_argument("--n", type=_ints, default=tuple(p[0] for p in CONDITION_PAIRS), help="background subdivisions, comma separated")
    parser.add_argument("--m", type=_ints, default=tuple(p[1] for p in CONDITION_PAIRS), help="overlapping subdivisions, comma separated")
    parser.add_argument("--l", type=_floats, default=L_SWEEP, help="inner box parameters in (0.2, 0.5)")
    parser.add_argument("--angle", type=float, default=0.35, help="rotation of the overlapping mesh in radians")
    parser.add_argument("--gamma", type=float, default=10.0)
    parser.add_argument("--delta", type=float, default=0.05)
    parser.add_argument("--beta", type=int, default=1, choices=(-1, 1))
    parser.add_argument("--no-sh", dest="with_sh", action="store_false", help="omit the overlap penalty (convergence, solve)")
    parser.add_argument("--case", default="manufactured", choices=("manufactured", "patch", "zero"))
    parser.add_argument("--kappa", action="store_true", help="also report the condition number (solve)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dump-matrix", action="store_true")
    parser.add_argument("--dump-geometry", action="store_true")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    np.random.seed(args.seed)
    try:
        config = ExperimentConfig(
            subcommand=args.subcommand,
            levels=args.levels,
            n=args.n,
            m=args.m,
            l=args.l,
            angle=args.angle,
            gamma=args.gamma,
            delta=args.delta,
            beta=args.beta,
            with_sh=args.with_sh,
            output_dir=args.out,
            seed=args.seed,
            case=args.case,
            dump_matrix=args.dump_matrix,
            dump_geometry=args.dump_geometry,
            kappa=args.kappa,
        )
    except ValueError as exc:
        print(f"olm-stokes: error: {exc}", file=sys.stderr)
        return 2

    if config.subcommand == "convergence":
        reports, slopes = run_convergence(config)
        for r in reports:
            print(f"level {r.level}: h={r.h_max:.4g} dofs={r.n_dofs} H1={r.err_u_h1:.4e} L2p={r.err_p_l2:.4e}")
        print(" ".join(f"{k}={v:.3f}" for k, v in slopes.items()))
    elif config.subcommand == "condition":
        for r in run_condition(config):
            print(f"N={r.N} M={r.M} l={r.l} with_sh={r.with_sh}: kappa={r.kappa:.4e} kappa*h^2={r.kappa_h2:.1f}")
    elif config.subcommand == "infsup":
        for l, with_sh, c in run_infsup(config):
            print(f"l={l} with_sh={with_sh}: c={c:.5g}")
    else:
        info = run_solve(config)
        print(f"dofs={info['ndofs']} residual={info['residual']:.3e}")
        if "kappa" in info:
            print(f"kappa={info['kappa']:.4e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
