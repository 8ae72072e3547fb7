"""Command-line interface.

One subcommand per capability: enumerate, dim, density, check, fit,
lemma-check, ewsm-rank, sample, posterior, export-dot. Primary output is
machine-readable (plain numbers, JSON, or newline-delimited JSON) on
stdout; diagnostics go to stderr. Exit status 0 on success, 1 on a
domain error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import DomainError
from .graphs import (
    count_decomposable,
    enumerate_decomposable,
    graph_from_json,
    graph_to_json,
    members,
    to_dot,
    vset,
)
from .laws import (
    CsfLaw,
    DensityTable,
    cef_dimension,
    csf_dimension,
    density_from_json,
    density_to_json,
    hub_law,
    law_from_json,
    law_to_json,
    normalize_by_enumeration,
    uniform_csf,
)
from .markov import (
    PropertyKind,
    check_property,
    ewsm_dimension_analysis,
    fit_csf_from_density,
    verify_lemma1_identity,
    verify_lemma2_ratio,
)
from .posterior import bernoulli_dirichlet_score, load_binary_csv, posterior_law
from .sampler import run_chain


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cliquesep",
        description="Clique-separator factorisation laws over decomposable graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str, *flags: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        if "n" in flags:
            p.add_argument("--n", type=int, default=None, help="vertex count")
        if "law" in flags:
            p.add_argument("--law", default=None, help="law file path, density file path, 'uniform', or 'hub'")
            p.add_argument("--hubs", default=None, help="comma-separated hub vertex indices")
            p.add_argument("--phi-rate", type=float, default=4.0, help="clique size rate for --law hub")
            p.add_argument("--psi-rate", type=float, default=0.5, help="separator size rate for --law hub")
        if "out" in flags:
            p.add_argument("--out", default=None, help="write primary output here instead of stdout")
        return p

    p = add("enumerate", "list or count the decomposable graphs on n vertices", "n", "out")
    p.add_argument("--count-only", action="store_true", help="print only the count")

    add("dim", "print the factorisation-law and shared-potential dimensions", "n", "out")

    add("density", "normalise a law exactly over the enumerated graphs", "n", "law", "out")

    p = add("check", "test a structural Markov property exhaustively", "n", "law", "out")
    p.add_argument("--property", choices=[k.value for k in PropertyKind], default="wsm")
    p.add_argument("--tol", type=float, default=1e-9)

    add("fit", "reconstruct factorisation potentials from a density", "n", "law", "out")

    p = add("lemma-check", "verify the product identity and ratio invariance", "n", "law", "out")
    p.add_argument("--tol", type=float, default=1e-9)

    add("ewsm-rank", "rank analysis of the weakest conditioning family", "n", "out")

    p = add("sample", "run a Metropolis edge-flip chain", "n", "law", "out")
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--thin", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = add("posterior", "conjugate update from binary data, output as a density", "n", "law", "out")
    p.add_argument("--data", required=True, help="CSV of 0/1 values, one row per observation")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--skip-header", action="store_true", help="skip one header row")

    p = add("export-dot", "render a graph in DOT, hubs filled", "out")
    p.add_argument("--graph", required=True, help="graph file path")
    p.add_argument("--hubs", default=None, help="comma-separated hub vertex indices")

    return parser


def _parse_hubs(text: str | None) -> int:
    if not text:
        return 0
    try:
        return vset([int(tok) for tok in text.split(",")])
    except ValueError as e:
        raise DomainError(f"invalid hub list {text!r}") from e


def _need_n(args) -> int:
    if args.n is None:
        raise DomainError("--n is required here")
    return args.n


def _load_law(args) -> CsfLaw:
    if args.law is None or args.law == "uniform":
        return uniform_csf(_need_n(args))
    if args.law == "hub":
        return hub_law(_need_n(args), _parse_hubs(args.hubs), args.phi_rate, args.psi_rate)
    with open(args.law) as fh:
        text = fh.read()
    obj = json.loads(text)
    if "entries" in obj:
        raise DomainError("this subcommand needs a law, not a density table")
    law = law_from_json(text)
    if args.n is not None and args.n != law.n:
        raise DomainError(f"--n {args.n} disagrees with the law file's n={law.n}")
    return law


def _load_density(args) -> DensityTable:
    if args.law is not None and args.law not in ("uniform", "hub"):
        with open(args.law) as fh:
            text = fh.read()
        obj = json.loads(text)
        if "entries" in obj:
            density = density_from_json(text)
            if args.n is not None and args.n != density.n:
                raise DomainError(f"--n {args.n} disagrees with the density file's n={density.n}")
            return density
    return normalize_by_enumeration(_load_law(args))


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _witness_obj(witness):
    if witness is None:
        return None
    return {
        "a": members(witness.a),
        "b": members(witness.b),
        "graphs": [[[i, j] for i, j in g.edges()] for g in witness.graphs],
        "value": witness.value,
    }


def _cmd_enumerate(args) -> None:
    n = _need_n(args)
    if args.count_only:
        _emit(args, f"{count_decomposable(n)}\n")
        return
    lines = [graph_to_json(g) for g in enumerate_decomposable(n)]
    _emit(args, "\n".join(lines) + "\n")


def _cmd_dim(args) -> None:
    n = _need_n(args)
    _emit(args, f"{csf_dimension(n)} {cef_dimension(n)}\n")


def _cmd_density(args) -> None:
    _emit(args, density_to_json(normalize_by_enumeration(_load_law(args))) + "\n")


def _cmd_check(args) -> None:
    density = _load_density(args)
    report = check_property(density, PropertyKind(args.property), args.tol)
    obj = {
        "property": report.kind.value,
        "passed": report.passed,
        "worst_violation": report.worst_violation,
        "tol": args.tol,
        "witness": _witness_obj(report.witness),
    }
    _emit(args, json.dumps(obj, sort_keys=True) + "\n")


def _cmd_fit(args) -> None:
    density = _load_density(args)
    law = fit_csf_from_density(density)
    check = normalize_by_enumeration(law)
    err = max(abs(check.prob(g) - p) / p for g, p in density.items())
    print(f"max relative reconstruction error: {err:.3e}", file=sys.stderr)
    _emit(args, law_to_json(law) + "\n")


def _cmd_lemma_check(args) -> None:
    density = _load_density(args)
    n = density.n
    product_dev = 0.0
    for g in enumerate_decomposable(n):
        product_dev = max(product_dev, verify_lemma1_identity(density, g))
    ratio_dev = 0.0
    for s in range(1 << n):
        if ((1 << n) - 1 & ~s).bit_count() >= 2:
            ratio_dev = max(ratio_dev, verify_lemma2_ratio(density, s))
    obj = {
        "product_identity_max_deviation": product_dev,
        "ratio_spread_max": ratio_dev,
        "tol": args.tol,
        "passed": max(product_dev, ratio_dev) <= args.tol,
    }
    _emit(args, json.dumps(obj, sort_keys=True) + "\n")


def _cmd_ewsm_rank(args) -> None:
    n = _need_n(args)
    analysis = ewsm_dimension_analysis(n)
    obj = {
        "n": analysis.n,
        "num_constraints_bound": analysis.num_constraints_bound,
        "rank": analysis.rank,
        "free_dimension_bound": analysis.free_dimension_bound,
        "csf_dimension": analysis.csf_dimension,
    }
    _emit(args, json.dumps(obj, sort_keys=True) + "\n")


def _cmd_sample(args) -> None:
    law = _load_law(args)
    summary = run_chain(law, steps=args.steps, thin=args.thin, seed=args.seed)
    lines = []
    for rec in summary.records:
        lines.append(
            json.dumps(
                {
                    "step": rec.step,
                    "edges": [[i, j] for i, j in rec.graph.edges()],
                    "logd": rec.log_density,
                    "cliques": rec.num_cliques,
                    "max_clique": rec.max_clique,
                },
                sort_keys=True,
            )
        )
    lines.append(
        json.dumps(
            {
                "acceptance_rate": summary.acceptance_rate,
                "steps": summary.steps,
                "retained": len(summary.records),
                "seed": summary.seed,
            },
            sort_keys=True,
        )
    )
    _emit(args, "\n".join(lines) + "\n")


def _cmd_posterior(args) -> None:
    prior = _load_law(args)
    data = load_binary_csv(args.data, skip_header=args.skip_header)
    if data and len(data[0]) != prior.n:
        raise DomainError(f"data has {len(data[0])} columns but the law has n={prior.n}")
    score = bernoulli_dirichlet_score(data, args.alpha)
    post = posterior_law(prior, score)
    _emit(args, density_to_json(normalize_by_enumeration(post)) + "\n")


def _cmd_export_dot(args) -> None:
    with open(args.graph) as fh:
        g = graph_from_json(fh.read())
    _emit(args, to_dot(g, _parse_hubs(args.hubs)))


_COMMANDS = {
    "enumerate": _cmd_enumerate,
    "dim": _cmd_dim,
    "density": _cmd_density,
    "check": _cmd_check,
    "fit": _cmd_fit,
    "lemma-check": _cmd_lemma_check,
    "ewsm-rank": _cmd_ewsm_rank,
    "sample": _cmd_sample,
    "posterior": _cmd_posterior,
    "export-dot": _cmd_export_dot,
}


def run_command(argv=None) -> int:
    """Execute one subcommand; returns the process exit status."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        _COMMANDS[args.command](args)
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
