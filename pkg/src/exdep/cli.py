"""Command-line surface: every simulation study as a seeded subcommand.

Each subcommand writes a plot-ready CSV (or JSON) artifact atomically
(temp file + rename).  Exit codes: 0 success, 1 numerical/model error,
2 usage error.  Identical configurations produce byte-identical output.
"""

import argparse
import json
import math
import os
import sys
import tempfile
from importlib import resources

import numpy as np

from . import estimate, fem, kernels, mesh
from .errors import ExdepError
from .exptail import GhParams
from .lintrans import (CoefficientMatrix, Regime, chi_gh_two, chi_limit_a22,
                       classify, eta_closed_form, tail_summary)

DEFAULT_NIG_NOISE = {"mu": -1.0, "gamma": 1.0, "psi": 1.0, "tau": 1.0}


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".exdep-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _threads(args):
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("EXDEP_THREADS", "1"))


# ----------------------------------------------------------------------
# chi-vs-a22: chi(a22) curves for the two-variable GH model
# ----------------------------------------------------------------------

def cmd_chi_vs_a22(args):
    grids = [
        [(lam, 1.0, 1.0) for lam in (-0.5, 1.0, 5.0, 30.0)],
        [(1.0, tau, 1.0) for tau in (0.5, 1.0, 5.0, 30.0)],
        [(1.0, 1.0, psi) for psi in (0.5, 1.0, 5.0, 30.0)],
    ]
    if args.params:
        with open(args.params) as fh:
            spec = json.load(fh)
        grids = [[(p["lambda"], p["tau"], p["psi"]) for p in spec]]
    a22_grid = args.a22_grid or [round(0.35 + 0.1 * i, 10) for i in range(7)]
    lines = ["lambda,tau,psi,a22,chi"]
    for family in grids:
        for (lam, tau, psi) in family:
            params = GhParams(lam, tau, psi, 0.0, 0.0)
            values = [chi_gh_two(args.a12, a22, params) for a22 in a22_grid]
            if np.any(np.diff(values) >= 0.0):
                raise ExdepError(
                    f"chi(a22) curve not strictly decreasing for lambda={lam}, tau={tau}, psi={psi}"
                )
            for a22, chi in zip(a22_grid, values):
                lines.append(f"{lam!r},{tau!r},{psi!r},{a22!r},{chi!r}")
            limit = chi_limit_a22(args.a12, params)
            lines.append(f"{lam!r},{tau!r},{psi!r},1.0,{limit!r}")
    _atomic_write(args.out, "\n".join(lines) + "\n")
    return 0


# ----------------------------------------------------------------------
# ou-convergence: eta of one-sided partitions against the process limit
# ----------------------------------------------------------------------

def ou_eta_partition(a, s1, h, delta, end):
    pad = math.ceil(25.0 / delta) * delta  # grid-aligned left padding below s1
    part = mesh.partition_1d(s1 - pad, end, delta=delta)
    matrix = mesh.ou_coefficients(a, s1, s1 + h, part)
    if classify(matrix).regime is Regime.ASYMPTOTIC_INDEPENDENCE:
        return eta_closed_form(matrix)
    return 1.0


def cmd_ou_convergence(args):
    h_grid = args.h_grid or [round(0.1 * i, 10) for i in range(1, int(args.T / 0.1) + 1)]
    lines = ["delta,h,eta_n,eta_limit"]
    sup_gap_finest = 0.0
    finest = min(args.deltas)
    for delta in args.deltas:
        for h in h_grid:
            eta_n = ou_eta_partition(args.a, args.s1, h, delta, args.T)
            eta_limit = kernels.ou_eta(args.a, h)
            if eta_n < eta_limit - 1e-9:
                raise ExdepError(f"eta_n below the limit at delta={delta}, h={h}")
            if delta == finest:
                sup_gap_finest = max(sup_gap_finest, eta_n - eta_limit)
            lines.append(f"{delta!r},{h!r},{eta_n!r},{eta_limit!r}")
    if sup_gap_finest >= 0.02:
        raise ExdepError(f"sup gap {sup_gap_finest} at delta={finest} not below 0.02")
    print(f"sup gap at delta={finest}: {sup_gap_finest:.6f}")
    _atomic_write(args.out, "\n".join(lines) + "\n")
    return 0


# ----------------------------------------------------------------------
# matern-eta: FEM vs integral approximation across smoothness values
# ----------------------------------------------------------------------

def random_sites(rng, n_sites, bbox=(0.05, 0.05, 0.95, 0.95)):
    xmin, ymin, xmax, ymax = bbox
    pts = rng.random((n_sites, 2))
    return np.column_stack([xmin + pts[:, 0] * (xmax - xmin),
                            ymin + pts[:, 1] * (ymax - ymin)])


def cmd_matern_eta(args):
    nodes = 40
    n_sites = args.n_sites or (225 if args.paper_scale else 50)
    nodes = args.mesh_nodes or nodes
    grid = mesh.lattice_mesh_2d((0.0, 0.0, 1.0, 1.0), nodes, args.extension)
    rng = np.random.default_rng(args.seed)
    sites = random_sites(rng, n_sites)
    lines = ["alpha,method,h,eta,eta_thm1,eta_conjecture"]
    for alpha in args.alphas:
        kern = kernels.matern_kernel(args.kappa, alpha, 2)
        g0 = kern.value_at_zero
        system = fem.fem_assemble(grid, args.kappa, int(alpha), lumped=True)
        coeff_int = mesh.integral_coefficients(kern, sites, grid)
        coeff_fem = fem.fem_coefficients(system, sites)
        rows_int = coeff_int.normalized
        rows_fem = coeff_fem.normalized
        for i in range(n_sites):
            for j in range(i + 1, n_sites):
                h = float(np.linalg.norm(sites[i] - sites[j]))
                thm1 = 0.5 if math.isinf(g0) else 0.5 + float(kern(h)) / (2.0 * g0)
                conj = kernels.limit_eta_conjecture(kern, h)
                for method, rows in (("integral", rows_int), ("fem", rows_fem)):
                    pair = CoefficientMatrix(rows[[i, j]])
                    if classify(pair).regime is Regime.ASYMPTOTIC_INDEPENDENCE:
                        eta = eta_closed_form(pair)
                    else:
                        eta = 1.0
                    lines.append(f"{alpha!r},{method},{h!r},{eta!r},{thm1!r},{conj!r}")
    _atomic_write(args.out, "\n".join(lines) + "\n")
    return 0


# ----------------------------------------------------------------------
# simulate-and-chi: empirical chi(q) of the simulated FEM field
# ----------------------------------------------------------------------

def cmd_simulate_and_chi(args):
    noise = fem.TypeGNoise("nig", **DEFAULT_NIG_NOISE)
    mesh_sides = [args.mesh_nodes or 20]
    default_n = 10 ** 5 if args.appendix_d else 10 ** 6
    if args.appendix_d:
        mesh_sides = [5, 10, 25]
    n = args.samples if args.samples is not None else default_n
    rng = np.random.default_rng(args.seed)
    sites = random_sites(rng, args.n_sites or 20)
    lines = ["mesh_side,pair_id,h,q,chi_hat,se"]
    for side in mesh_sides:
        if n == 0:
            break
        grid = mesh.lattice_mesh_2d((0.0, 0.0, 1.0, 1.0), side, args.extension)
        system = fem.fem_assemble(grid, args.kappa, args.alpha, lumped=True)
        x = fem.simulate_field(system, sites, noise, n, args.seed,
                               threads=_threads(args))
        pair_id = 0
        for i in range(len(sites)):
            for j in range(i + 1, len(sites)):
                h = float(np.linalg.norm(sites[i] - sites[j]))
                sample = estimate.BivariateSample(x[:, i], x[:, j])
                for q in args.q:
                    est = estimate.empirical_chi(sample, q)
                    lines.append(
                        f"{side},{pair_id},{h!r},{q!r},{est.value!r},{est.se!r}"
                    )
                pair_id += 1
    _atomic_write(args.out, "\n".join(lines) + "\n")
    return 0


# ----------------------------------------------------------------------
# eta: tail summary of a coefficient matrix file
# ----------------------------------------------------------------------

def _validate_summary(obj):
    import jsonschema

    schema = json.loads(
        resources.files("exdep.schemas").joinpath("tail_summary.schema.json").read_text()
    )
    jsonschema.validate(obj, schema)


def cmd_eta(args):
    matrix = CoefficientMatrix.from_csv(args.matrix)
    summary = tail_summary(matrix).to_json()
    _validate_summary(summary)
    text = json.dumps(summary, indent=2) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


# ----------------------------------------------------------------------
# counterexample: chi(q) not preserved under convergence in probability
# ----------------------------------------------------------------------

def cmd_counterexample(args):
    rng = np.random.default_rng(args.seed)
    n_samples = args.samples or 10 ** 6
    q = 0.999
    lines = ["n,q,chi_hat,se"]
    for n in args.n_values:
        heavy = rng.pareto(1.0, n_samples) + 1.0  # survival x^{-1} on [1, inf)
        eps1 = rng.standard_normal(n_samples)
        eps2 = rng.standard_normal(n_samples)
        sample = estimate.BivariateSample(heavy / n + eps1, heavy / n + eps2)
        est = estimate.empirical_chi(sample, q)
        lines.append(f"{n},{q!r},{est.value!r},{est.se!r}")
    _atomic_write(args.out, "\n".join(lines) + "\n")
    return 0


# ----------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="exdep",
        description="Extremal dependence of exponential-tailed moving averages: "
                    "reproducible simulation studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_required=True):
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--seed", type=int, default=None, required=seed_required,
                       help="root seed (required for stochastic subcommands)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: EXDEP_THREADS or 1)")
        p.add_argument("--params", default=None, help="JSON parameter file")
        p.add_argument("--paper-scale", action="store_true",
                       help="restore the published experiment sizes")

    p = sub.add_parser("chi-vs-a22", help="chi(a22) curves with their a22->1 limits")
    common(p, seed_required=False)
    p.add_argument("--a12", type=float, default=0.3)
    p.add_argument("--a22-grid", type=_float_list, default=None)
    p.set_defaults(func=cmd_chi_vs_a22)

    p = sub.add_parser("ou-convergence", help="one-sided partition eta vs the OU limit")
    common(p, seed_required=False)
    p.add_argument("--a", type=float, default=0.2)
    p.add_argument("--s1", type=float, default=0.0)
    p.add_argument("--T", type=float, default=4.0)
    p.add_argument("--deltas", type=_float_list, default=[0.4, 0.2, 0.05])
    p.add_argument("--h-grid", type=_float_list, default=None)
    p.set_defaults(func=cmd_ou_convergence)

    p = sub.add_parser("matern-eta", help="FEM vs integral eta across smoothness")
    common(p)
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--alphas", type=_float_list, default=[2.0, 3.0, 4.0, 5.0])
    p.add_argument("--mesh-nodes", type=int, default=None, help="lattice nodes per side")
    p.add_argument("--n-sites", type=int, default=None)
    p.add_argument("--extension", type=int, default=6, help="outer extension rings")
    p.set_defaults(func=cmd_matern_eta)

    p = sub.add_parser("simulate-and-chi", help="empirical chi(q) of simulated fields")
    common(p)
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--alpha", type=int, default=2)
    p.add_argument("--mesh-nodes", type=int, default=None, help="lattice nodes per side")
    p.add_argument("--n-sites", type=int, default=20)
    p.add_argument("--extension", type=int, default=2)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--q", type=_float_list, default=[0.95, 0.975, 0.99])
    p.add_argument("--appendix-d", action="store_true",
                   help="coarse/fine mesh comparison (25/100/625-node lattices)")
    p.set_defaults(func=cmd_simulate_and_chi)

    p = sub.add_parser("eta", help="tail summary (JSON) of a coefficient matrix CSV")
    p.add_argument("--matrix", required=True, help="CSV with one row per component")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eta)

    p = sub.add_parser("counterexample",
                       help="pre-asymptotic chi of X/n + noise (illustration only)")
    common(p)
    p.add_argument("--n-values", type=lambda s: [int(v) for v in s.split(",")],
                   default=[1, 10, 100])
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(func=cmd_counterexample)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ExdepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
