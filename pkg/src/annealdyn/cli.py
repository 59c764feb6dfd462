"""Command-line entry point: ``annealdyn {run,sweep,threshold,oracle,fit}``.

Exit codes: 0 success, 2 configuration or contract error, 3 numerical
blow-up, 4 memory cap exceeded.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .config import load_config
from .errors import ConfigError, FitIllPosed, MemoryCapError, NumericalBlowUp
from .model import MixtureSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_RESOURCE = 4

log = logging.getLogger("annealdyn")


def parse_model(text: str) -> MixtureSpec:
    """``"3:1,14:1"`` -> Q^3 + Q^14; a bare ``"3"`` is the pure model."""
    pairs = []
    for item in text.split(","):
        p, _, a = item.strip().partition(":")
        try:
            pairs.append((int(p), float(a) if a else 1.0))
        except ValueError:
            raise ConfigError(f"--model: cannot parse {item!r} (expected p or p:a)") from None
    return MixtureSpec.from_pairs(pairs)


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", required=True, metavar="PATH", help="JSON run configuration")
    sp.add_argument("--out", metavar="DIR", help="output directory (overrides output_dir)")
    sp.add_argument("--dt", type=float, help="time step (overrides grid.dt)")
    sp.add_argument("--tau", type=float, help="runtime (overrides schedule.tau)")
    sp.add_argument("--solver", choices=("langevin", "keldysh"))
    sp.add_argument("--seed", type=int, help="oracle base seed (overrides oracle.base_seed)")
    sp.add_argument("--threads", type=int, help="numba worker threads")
    sp.add_argument("--memory-cap", type=int, metavar="BYTES",
                    help="cap on the two-time grid memory of a single run")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="annealdyn",
        description="Mean-field annealing dynamics of spherical mixed p-spin glasses.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", help="one solve: trace CSV and summary JSON")
    _add_common(sp)
    sp.add_argument("--dump-kernels", action="store_true",
                    help="also write the packed C and R triangles to kernels.npz")

    sp = sub.add_parser("sweep", help="solve every tau in the sweep and fit the decay")
    _add_common(sp)
    sp.add_argument("--fit-tau-min", type=float, help="drop taus below this from the fit")
    sp.add_argument("--fit-tau-max", type=float, help="drop taus above this from the fit")

    sp = sub.add_parser("oracle", help="finite-N Monte Carlo against the mean-field solver")
    _add_common(sp)

    sp = sub.add_parser("threshold", help="print the threshold energy of a model")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--config", metavar="PATH")
    g.add_argument("--model", help="mixture as p:a pairs, e.g. 3:1,14:1")

    sp = sub.add_parser("fit", help="power-law fit of an existing energies CSV")
    sp.add_argument("csv", help="CSV with tau and epsilon columns (s0 optional)")
    sp.add_argument("--out", metavar="PATH", help="fit JSON path (default: refit.json next to the CSV)")
    sp.add_argument("--min-points", type=int, default=4)
    sp.add_argument("--fit-tau-min", type=float)
    sp.add_argument("--fit-tau-max", type=float)
    return ap


def _config(args):
    overrides = {
        "output_dir": args.out,
        "grid.dt": args.dt,
        "schedule.tau": args.tau,
        "solver": args.solver,
        "oracle.base_seed": args.seed,
        "threads": args.threads,
        "memory_cap_bytes": args.memory_cap,
    }
    if getattr(args, "dump_kernels", False):
        overrides["dump_kernels"] = True
    if getattr(args, "fit_tau_min", None) is not None:
        overrides["fit.tau_min"] = args.fit_tau_min
    if getattr(args, "fit_tau_max", None) is not None:
        overrides["fit.tau_max"] = args.fit_tau_max
    if args.seed is not None and args.command != "oracle":
        raise ConfigError("--seed only applies to the oracle command")
    cfg = load_config(args.config, overrides)
    if cfg.threads is not None:
        import numba

        numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))
    return cfg


def dispatch(args) -> int:
    from . import workflows as wf

    if args.command == "threshold":
        spec = parse_model(args.model) if args.model else load_config(args.config).model
        print(f"{spec.threshold_energy():.12g}")
        return EXIT_OK
    if args.command == "fit":
        doc = wf.cmd_fit(args.csv, args.out, args.min_points, args.fit_tau_min, args.fit_tau_max)
        print(f"epsilon_inf={doc['epsilon_inf']:.6f} amplitude={doc['amplitude']:.6f} "
              f"alpha={doc['alpha']:.4f} rss={doc['rss']:.3g}")
        return EXIT_OK

    cfg = _config(args)
    if args.command == "run":
        summary = wf.cmd_run(cfg)
        print(f"epsilon_final={summary['epsilon_final']:.10g} "
              f"runtime={summary['runtime_seconds']:.2f}s -> {cfg.output_dir}")
    elif args.command == "sweep":
        doc = wf.cmd_sweep(cfg)
        print(wf.comparison_line(doc))
    elif args.command == "oracle":
        rep = wf.cmd_oracle(cfg)
        verdict = "within" if rep["epsilon_within_allowance"] else "OUTSIDE"
        print(f"max|d epsilon|={rep['max_abs_delta_epsilon']:.5f} at t={rep['t_at_max_delta_epsilon']:g} "
              f"({verdict} allowance, {rep['n_violations']}/{rep['n_points']} points over)")
        fn = rep["finite_n_corrected"]
        print(f"finite-N variance corrected: max|d epsilon|={fn['max_abs_delta_epsilon']:.5f} "
              f"({fn['n_violations']}/{rep['n_points']} points over)")
        if "c_within_3_stderr" in rep:
            print(f"max|C(t,0) - exp(-t)|={rep['max_abs_delta_c_exact']:.5f} "
                  f"({rep['max_sigma_c_exact']:.2f} stderr)")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(args)
    except (ConfigError, FitIllPosed, ValueError) as exc:
        print(f"annealdyn: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalBlowUp as exc:
        print(f"annealdyn: numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except MemoryCapError as exc:
        print(f"annealdyn: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
