"""Command-line entry point.

Every subcommand prints its JSON result to stdout. With ``--out-dir`` it
also writes the result files, report figures and a ``manifest.json``.
Exit codes: 0 success (including infinite entropy), 2 input error,
3 size or infeasibility error, 4 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
from importlib import metadata
from pathlib import Path

import matplotlib
import numpy as np
import scipy

from . import __version__, acceptance, io, plots
from .core import Distribution, DomainError, EntropyError, SizeError, maximal_independent_sets
from .covering import (
    CountableFamilySampler,
    exact_min_cover,
    greedy_cover_count,
    random_cover_rate,
)
from .graphon import (
    circle_graphon_entropy,
    independent_events_allbutone,
    interval_graphon_entropy,
    quotient_system,
)
from .lp import LPError, entropy_maximizing_distribution, frac_chromatic, frac_clique, lp_residuals
from .solver import PreconditionFailure, cycle_entropy, solve_entropy

log = logging.getLogger("graphentropy")

EXIT_OK, EXIT_INPUT, EXIT_SIZE, EXIT_NONCONV = 0, 2, 3, 4
DEFAULT_TOL = 1e-8
LP_TOL = 1e-9
COVER_HEADER = ["ell", "M", "covered_mass", "rate", "std_error", "method", "success"]


class Run:
    """Collects outputs and writes the manifest for one invocation."""

    def __init__(self, args, input_obj, seed=None, tolerances=None):
        self.args = args
        self.out_dir = Path(args.out_dir) if args.out_dir else None
        self.input_digest = io.digest({"input": input_obj, "params": _params(args)})
        self.seed = seed
        self.tolerances = tolerances or {}
        self.outputs: list[str] = []
        if self.out_dir:
            self.out_dir.mkdir(parents=True, exist_ok=True)

    @property
    def figures(self) -> bool:
        return self.out_dir is not None and not self.args.no_figures

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.outputs.append(name)
        return p

    def finish(self, result: dict) -> None:
        print(json.dumps(result, indent=2, sort_keys=True))
        if not self.out_dir:
            return
        io.write_json(self.path("result.json"), result)
        manifest = {
            "subcommand": self.args.command,
            "input_digest": self.input_digest,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "versions": _versions(),
            "outputs": sorted(self.outputs),
        }
        io.write_json(self.out_dir / "manifest.json", manifest)


def _params(args) -> dict:
    skip = {"func", "out_dir", "no_figures", "verbose", "system", "graph", "graphon"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = __version__
    return {"graphentropy": pkg, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "matplotlib": matplotlib.__version__}


def _unit(args) -> float:
    return io.LOG_BASES[args.log_base]


def _real(x: float, args) -> object:
    return io.fmt_real(x / _unit(args))


def _load_system(args):
    """System from --system or --graph, with its canonical JSON form."""
    if getattr(args, "system", None):
        system = io.system_from_json(io.load(args.system))
        return system, io.system_to_json(system)
    if getattr(args, "graph", None):
        graph = io.graph_from_json(io.load(args.graph))
        return maximal_independent_sets(graph), io.graph_to_json(graph)
    raise io.InputError("argv", "one of --system or --graph is required")


def _certificate_report(args, run: Run, system, cert) -> int:
    result = io.certificate_to_json(cert, args.log_base)
    if run.figures and cert.history:
        plots.gap_trace(cert.history, run.path("gap_trace.png"), args.log_base)
    run.finish(result)
    if not cert.infinite and not cert.converged:
        log.error("not converged: gap %.3g > tol %.3g", cert.gap, args.tol)
        return EXIT_NONCONV
    return EXIT_OK


def cmd_entropy(args) -> int:
    system, raw = _load_system(args)
    run = Run(args, raw, tolerances={"gap": args.tol})
    cert = solve_entropy(system, tol=args.tol, max_iters=args.max_iters, record_history=True)
    return _certificate_report(args, run, system, cert)


def cmd_step_graphon(args) -> int:
    w = io.graphon_from_json(io.load(args.graphon))
    run = Run(args, io.graphon_to_json(w), tolerances={"gap": args.tol})
    system = quotient_system(w)
    cert = solve_entropy(system, tol=args.tol, max_iters=args.max_iters, record_history=True)
    if run.figures:
        plots.graphon_support(w, run.path("support.png"))
    return _certificate_report(args, run, system, cert)


def cmd_frac(args) -> int:
    system, raw = _load_system(args)
    run = Run(args, raw, tolerances={"lp_residual": LP_TOL})
    chi = frac_chromatic(system)
    if chi.infinite:
        run.finish({"chi_frac": "infinity", "omega_frac": "infinity", "pi_star": {}})
        return EXIT_OK
    omega = frac_clique(system)
    worst = max(max(lp_residuals(system, chi).values()), max(lp_residuals(system, omega).values()))
    if worst > LP_TOL:
        log.warning("LP residual %.3g exceeds %.0e", worst, LP_TOL)
    pi_star = entropy_maximizing_distribution(system)
    run.finish({
        "chi_frac": io.fmt_real(chi.objective),
        "omega_frac": io.fmt_real(omega.objective),
        "pi_star": {s: io.fmt_real(m) for s, m in pi_star.atoms},
        "cover_weights": [[k, io.fmt_real(c)] for k, c in chi.primal.items() if c > 0],
        "max_residual": io.fmt_real(worst),
    })
    return EXIT_OK


def _parse_floats(text: str, name: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise io.InputError(name, f"expected comma-separated numbers, got {text!r}") from None


def cmd_closed_form(args) -> int:
    run = Run(args, None)
    model = args.model
    if model == "circle":
        value = circle_graphon_entropy(_need(args.c, "--c"))
    elif model == "interval":
        value = interval_graphon_entropy(_need(args.c, "--c"))
    elif model == "cycle":
        n = int(_need(args.n, "--n"))
        ids = tuple(str(i) for i in range(2 * n + 1))
        if args.masses:
            masses = _parse_floats(args.masses, "--masses")
            if len(masses) != len(ids):
                raise io.InputError("--masses", f"expected {len(ids)} masses, got {len(masses)}")
            pi = Distribution(ids, np.array(masses))
        else:
            pi = Distribution.uniform(ids)
        value = cycle_entropy(n, pi)
    else:
        value = independent_events_allbutone(_need(args.m1, "--m1"), _need(args.m_inf, "--m-inf"))
    run.finish({"model": model, "entropy": _real(value, args), "log_base": args.log_base})
    return EXIT_OK


def _need(value, flag):
    if value is None:
        raise io.InputError(flag, "required for this model")
    return value


def _ells(text: str) -> list[int]:
    try:
        ells = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise io.InputError("--ell", f"expected comma-separated integers, got {text!r}") from None
    if not ells or min(ells) < 1:
        raise io.InputError("--ell", "block lengths must be positive")
    return ells


def _cover_rows(reports, args) -> list[list]:
    unit = _unit(args)
    return [[r.ell, r.boxes_used, r.covered_mass, r.rate / unit, r.std_error, r.method, int(r.success)]
            for r in reports]


def _finish_cover(args, run: Run, reports, bracket=None, limit=None) -> int:
    rows = _cover_rows(reports, args)
    unit = _unit(args)
    if run.out_dir:
        io.write_csv(run.path("cover.csv"), COVER_HEADER, rows)
        ok = [r for r in reports if r.success]
        if run.figures and ok:
            br = None if bracket is None else (bracket[0] / unit, bracket[1] / unit)
            lim = None if limit is None else limit / unit
            plots.rate_curve([r.ell for r in ok], [r.rate / unit for r in ok], run.path("rates.png"),
                             bracket=br, limit=lim, unit=args.log_base)
    result = {"log_base": args.log_base,
              "rows": [dict(zip(COVER_HEADER, [_cell(v) for v in row])) for row in rows]}
    if bracket is not None:
        result["bracket"] = [_real(bracket[0], args), _real(bracket[1], args)]
    run.finish(result)
    return EXIT_OK


def _cell(v):
    if isinstance(v, (str, int)) or v is None:
        return v
    return io.fmt_real(v)


def cmd_simulate_cover(args) -> int:
    ells = _ells(args.ell)
    if args.mixture:
        try:
            n_text, eps_text = args.mixture.split(",")
            sampler = CountableFamilySampler(int(n_text), float(eps_text), args.m1, args.m_inf)
        except ValueError as exc:
            raise io.InputError("--mixture", f"expected n,eps ({exc})") from None
        run = Run(args, None, seed=args.seed)
        reports = [random_cover_rate(sampler, ell=ell, lam=args.lam, trials=args.trials, seed=args.seed,
                                     mode=args.mode) for ell in ells]
        limit = independent_events_allbutone(args.m1, args.m_inf) if args.m1 >= args.m_inf else None
        return _finish_cover(args, run, reports, limit=limit)
    system, raw = _load_system(args)
    run = Run(args, raw, seed=args.seed, tolerances={"gap": args.tol})
    cert = solve_entropy(system, tol=args.tol)
    if cert.infinite:
        run.finish({"entropy": "infinity", "rows": []})
        return EXIT_OK
    reports = [random_cover_rate(system, cert.point, ell=ell, lam=args.lam, trials=args.trials,
                                 seed=args.seed, mode=args.mode) for ell in ells]
    return _finish_cover(args, run, reports, bracket=cert.bracket)


def cmd_exact_cover(args) -> int:
    ells = _ells(args.ell)
    system, raw = _load_system(args)
    run = Run(args, raw)
    reports = []
    for ell in ells:
        try:
            reports.append(exact_min_cover(system, ell, args.lam))
        except SizeError as exc:
            if args.no_fallback:
                raise
            log.warning("ell=%d: %s; using the greedy cover", ell, exc)
            reports.append(greedy_cover_count(system, ell, args.lam))
    cert = solve_entropy(system)
    bracket = None if cert.infinite else cert.bracket
    return _finish_cover(args, run, reports, bracket=bracket)


def cmd_selftest(args) -> int:
    results = acceptance.run_all(print)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphentropy", description="Entropy of set systems, graphs and graphons.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out-dir", help="write result files, figures and manifest.json here")
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
        p.add_argument("--log-base", choices=sorted(io.LOG_BASES), default="nat")
        return p

    def solver_opts(p):
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--max-iters", type=int, default=10_000)

    p = add("entropy", cmd_entropy, "entropy of a set system")
    p.add_argument("--system", required=True)
    solver_opts(p)

    p = add("graph-entropy", cmd_entropy, "entropy of a finite graph")
    p.add_argument("--graph", required=True)
    solver_opts(p)

    p = add("frac", cmd_frac, "fractional chromatic and clique numbers")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--system")
    g.add_argument("--graph")

    p = add("step-graphon", cmd_step_graphon, "entropy of a step graphon")
    p.add_argument("--graphon", required=True)
    solver_opts(p)

    p = add("closed-form", cmd_closed_form, "closed-form entropies")
    p.add_argument("--model", required=True, choices=["circle", "interval", "cycle", "indep-events"])
    p.add_argument("--c", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--masses", help="comma-separated cycle masses in cyclic order")
    p.add_argument("--m1", type=float)
    p.add_argument("--m-inf", type=float)

    def cover_opts(p):
        p.add_argument("--ell", default="1,2,4,8", help="comma-separated block lengths")
        p.add_argument("--lambda", dest="lam", type=float, default=0.5)

    p = add("simulate-cover", cmd_simulate_cover, "random-box cover rates")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--system")
    g.add_argument("--graph")
    g.add_argument("--mixture", help="n,eps for the half-measure independent-events sampler")
    cover_opts(p)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["auto", "explicit", "expected"], default="auto")
    p.add_argument("--m1", type=float, default=0.5)
    p.add_argument("--m-inf", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = add("exact-cover", cmd_exact_cover, "minimum box covers on tiny instances")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--system")
    g.add_argument("--graph")
    cover_opts(p)
    p.add_argument("--no-fallback", action="store_true", help="fail instead of using the greedy cover")

    add("selftest", cmd_selftest, "run the acceptance criteria")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SizeError, LPError, PreconditionFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (io.InputError, DomainError, EntropyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
