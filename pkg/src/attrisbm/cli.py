"""Command-line interface: generate | infer | threshold | sweep | oracle."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bp import BPConfig, hard_assign, overlap, run
from .errors import ModelError, ParseError
from .graphs import read_graph, read_labels, write_graph
from .model import ModelParams, SymmetricSpec, expand_symmetric
from .oracle import exact_marginals
from .sampling import sample_communities, sample_graph
from .spectral import threshold_report
from .harness import SweepConfig, run_sweep

_SYM_KEYS = {"K": int, "R": int, "a": float, "b": float, "c": float, "n": int}


def _parse_pairs(pairs: list[str]) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ModelError(f"expected key=value, got {item!r}")
        key, _, value = item.partition("=")
        if key not in _SYM_KEYS:
            raise ModelError(f"unknown symmetric parameter {key!r}; valid: {sorted(_SYM_KEYS)}")
        out[key] = _SYM_KEYS[key](value)
    return out


def _symmetric_from_pairs(pairs: list[str], default_n: int = 4000) -> SymmetricSpec:
    kv = _parse_pairs(pairs)
    for required in ("K", "R", "a", "b", "c"):
        if required not in kv:
            raise ModelError(f"--sym requires {required}=...")
    if "n" not in kv:
        n = default_n
        if n % kv["R"]:
            n += kv["R"] - n % kv["R"]
        kv["n"] = n
    return SymmetricSpec(**kv)


def _load_model(args) -> tuple[ModelParams, SymmetricSpec | None]:
    if args.sym:
        spec = _symmetric_from_pairs(args.pairs)
        return expand_symmetric(spec), spec
    if not args.params:
        raise ModelError("provide either --sym key=value... or --params file.json")
    text = Path(args.params).read_text(encoding="utf-8")
    doc = json.loads(text)
    spec = None
    if "symmetric" in doc:
        sym = doc["symmetric"]
        spec = SymmetricSpec(K=sym["K"], R=sym["R"], a=sym["a"], b=sym["b"], c=sym["c"], n=sym["n"])
    return ModelParams.from_json(text), spec


def _write_marginal_csv(path: str, attrs: np.ndarray, labels: np.ndarray, marginals: np.ndarray) -> None:
    K = marginals.shape[1]
    header = "node,r,k_hat," + ",".join(f"p_{k + 1}" for k in range(K))
    lines = [header]
    for i in range(attrs.size):
        probs = ",".join(repr(float(p)) for p in marginals[i])
        lines.append(f"{i + 1},{attrs[i] + 1},{labels[i] + 1},{probs}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_generate(args) -> int:
    params, _ = _load_model(args)
    labels = sample_communities(params, args.seed)
    graph = sample_graph(params, labels, args.seed)
    prefix = Path(args.out)
    write_graph(
        graph,
        Path(str(prefix) + ".edges"),
        Path(str(prefix) + ".attrs"),
        Path(str(prefix) + ".truth"),
        header=f"generated by attrisbm, seed={args.seed}",
    )
    print(json.dumps({"n": graph.n, "edges": graph.num_edges, "prefix": str(prefix)}))
    return 0


def cmd_threshold(args) -> int:
    params, spec = _load_model(args)
    report = threshold_report(params, symmetric=spec)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _bp_config(args) -> BPConfig:
    return BPConfig(
        max_sweeps=args.max_sweeps,
        tol=args.tol,
        damping=args.damping,
        init=args.init,
        perturbation=args.perturbation,
        seed=args.seed,
    )


def cmd_infer(args) -> int:
    from .graphs import AttributedGraph

    params, _ = _load_model(args)
    graph = read_graph(args.edges, args.attrs)
    truth = read_labels(args.truth, graph.n) if args.truth else None
    if truth is not None:
        graph = AttributedGraph(n=graph.n, attrs=graph.attrs, edges=graph.edges, truth=truth)
    state, converged = run(graph, params, _bp_config(args))
    labels = hard_assign(state)
    _write_marginal_csv(args.out, graph.attrs, labels, state.marginals)
    summary = {
        "converged": converged,
        "iterations": state.iterations,
        "last_delta": state.last_delta,
        "out": args.out,
    }
    if truth is not None:
        summary["overlap"] = overlap(labels, truth, params.prior, graph.attrs).overlap
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    config = SweepConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
    overrides = {}
    if args.out:
        overrides["output_path"] = args.out
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if overrides:
        import dataclasses

        config = dataclasses.replace(config, **overrides)
    rows = run_sweep(config)
    failures = sum(1 for row in rows if row.status != "ok")
    print(json.dumps({"rows": len(rows), "failures": failures, "out": config.output_path}))
    return 0


def cmd_oracle(args) -> int:
    params, _ = _load_model(args)
    graph = read_graph(args.edges, args.attrs)
    marginals = exact_marginals(graph, params, budget=args.budget)
    labels = np.argmax(marginals, axis=1)
    _write_marginal_csv(args.out, graph.attrs, labels, marginals)
    print(json.dumps({"n": graph.n, "out": args.out}))
    return 0


def _add_model_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--sym", action="store_true", help="build a symmetric model from key=value pairs")
    sub.add_argument("pairs", nargs="*", metavar="key=value",
                     help="symmetric parameters: K R a b c [n]")
    sub.add_argument("--params", help="model parameters JSON file")


def _add_bp_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--max-sweeps", type=int, default=500, dest="max_sweeps")
    sub.add_argument("--tol", type=float, default=1e-6)
    sub.add_argument("--damping", type=float, default=0.0)
    sub.add_argument("--init", default="uniform-perturbed",
                     choices=("uniform-perturbed", "random", "truth-planted"))
    sub.add_argument("--perturbation", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attrisbm",
        description="Attributed stochastic block models: generation, thresholds, inference",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("generate", help="sample a graph and write edge/attr/truth files")
    _add_model_args(gen)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output path prefix")
    gen.set_defaults(func=cmd_generate)

    thr = subs.add_parser("threshold", help="print a detectability report as JSON")
    _add_model_args(thr)
    thr.add_argument("--out", help="also write the JSON to this file")
    thr.set_defaults(func=cmd_threshold)

    inf = subs.add_parser("infer", help="run belief propagation on graph files")
    inf.add_argument("--edges", required=True)
    inf.add_argument("--attrs", required=True)
    inf.add_argument("--params", required=True)
    inf.add_argument("--truth", help="optional ground-truth labels for overlap scoring")
    inf.add_argument("--out", required=True, help="marginals CSV path")
    inf.add_argument("--seed", type=int, default=0)
    _add_bp_args(inf)
    inf.set_defaults(func=cmd_infer, sym=False, pairs=[])

    swp = subs.add_parser("sweep", help="run a phase-transition sweep from a JSON config")
    swp.add_argument("--config", required=True)
    swp.add_argument("--out", help="override the configured output path")
    swp.add_argument("--jobs", type=int, help="parallel worker processes")
    swp.add_argument("--seed", type=int, help="override the master seed")
    swp.set_defaults(func=cmd_sweep)

    orc = subs.add_parser("oracle", help="exact enumeration marginals for tiny graphs")
    orc.add_argument("--edges", required=True)
    orc.add_argument("--attrs", required=True)
    orc.add_argument("--params", required=True)
    orc.add_argument("--out", required=True)
    orc.add_argument("--budget", type=int, default=1_000_000)
    orc.set_defaults(func=cmd_oracle, sym=False, pairs=[])

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
