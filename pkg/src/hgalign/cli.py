"""Command-line workbench: align, baseline, diagnose, synth.

Exit codes: 0 on success, 1 on data errors (one-line `error: ...` on
stderr), 2 on usage errors (argparse prints usage). Seeds resolve as
flag > DRSA_SEED environment variable > 0. `--threads` caps the BLAS
thread pools; use `--threads 1` for bit-reproducible runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import io
from .baselines import BaselineConfig, align_features
from .diagnostics import DiagnosticsReport, RelationError, relation_recon_error, type_separation_score
from .solver import SolverConfig, operators_for, run_alignment
from .synth import SynthSpec, generate

SEED_ENV_VAR = "DRSA_SEED"


def _resolve_seed(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{SEED_ENV_VAR}={env!r} is not an integer") from None
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hgalign",
        description="Relation-aware feature alignment for multi-domain heterogeneous graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_align = sub.add_parser("align", help="run the alignment solver on a graph")
    p_align.add_argument("--manifest", required=True, help="graph manifest JSON")
    p_align.add_argument("--out", required=True, help="output directory for embeddings")
    p_align.add_argument("--k", type=int, default=16, help="latent dimension (default 16)")
    p_align.add_argument("--rho", type=int, default=None,
                         help="relation subspace rank (default max(2, k//4))")
    p_align.add_argument("--beta", type=float, default=1.0,
                         help="structural residual penalty (default 1.0)")
    p_align.add_argument("--gamma", type=float, default=1.0,
                         help="projection regularization (default 1.0)")
    p_align.add_argument("--iters", type=int, default=30, help="iterations (default 30)")
    p_align.add_argument("--sigma", type=float, default=None,
                         help="projection sampling std (default 1/sqrt(rho))")
    p_align.add_argument("--seed", type=int, default=None,
                         help=f"random seed (default: ${SEED_ENV_VAR} if set, else 0)")
    p_align.add_argument("--variant", choices=["type", "relation", "global", "fullrank"],
                         default="type", help="operator variant (default type)")
    p_align.add_argument("--rel-tol", type=float, default=0.0,
                         help="early-stop threshold on relative objective change (0 disables)")
    p_align.add_argument("--threads", type=int, default=0,
                         help="cap BLAS threads (0 = library default; 1 for bit-exact reruns)")

    p_base = sub.add_parser("baseline", help="per-type SVD/PCA feature alignment")
    p_base.add_argument("--manifest", required=True)
    p_base.add_argument("--out", required=True)
    p_base.add_argument("--method", choices=["svd", "pca"], default="svd",
                        help="projection method (default svd)")
    p_base.add_argument("--dim", type=int, default=50,
                        help="unified target dimension (default 50)")
    p_base.add_argument("--threads", type=int, default=0)

    p_diag = sub.add_parser("diagnose", help="reconstruction and separation diagnostics")
    p_diag.add_argument("--manifest", required=True)
    p_diag.add_argument("--embeddings", required=True,
                        help="embedding directory produced by align, baseline, or synth")
    p_diag.add_argument("--out", required=True)
    p_diag.add_argument("--target", choices=["adjacency", "scores"], default="adjacency",
                        help="reconstruction target: 0/1 adjacency or planted real scores")
    p_diag.add_argument("--threads", type=int, default=0)

    p_synth = sub.add_parser("synth", help="generate a synthetic benchmark with ground truth")
    p_synth.add_argument("--spec", required=True, help="SynthSpec JSON file")
    p_synth.add_argument("--out", required=True)

    return parser


def _cmd_align(args) -> int:
    graph = io.load_graph(args.manifest)
    cfg = SolverConfig(
        k=args.k,
        rho=args.rho,
        beta=args.beta,
        gamma=args.gamma,
        max_iters=args.iters,
        sigma=args.sigma,
        seed=_resolve_seed(args.seed),
        variant=args.variant,
        rel_tol=args.rel_tol,
    )
    state, report = run_alignment(graph, cfg)
    io.save_embeddings(state, cfg, args.out)
    print(
        f"aligned {len(graph.node_types)} node types in {state.iteration} iteration(s); "
        f"objective {state.objective_trace[0]:.6g} -> {state.objective_trace[-1]:.6g}; "
        f"wrote {args.out}"
    )
    return 0


def _cmd_baseline(args) -> int:
    graph = io.load_graph(args.manifest)
    cfg = BaselineConfig(method=args.method, target_dim=args.dim)
    blocks = align_features(graph, cfg)
    io.save_baseline_embeddings(blocks, cfg, args.out)
    print(f"{cfg.method} alignment of {len(blocks)} node types to dim {cfg.target_dim}; "
          f"wrote {args.out}")
    return 0


def _fit_operator(z_src: np.ndarray, z_dst: np.ndarray, target: np.ndarray) -> np.ndarray:
    # Min-norm least-squares fit of target ~ z_src @ m @ z_dst.T, used when the
    # embeddings carry no operator information of their own (baseline runs).
    return np.linalg.pinv(z_src) @ target @ np.linalg.pinv(z_dst).T


def _cmd_diagnose(args) -> int:
    graph = io.load_graph(args.manifest)
    blocks, meta = io.load_embeddings(args.embeddings)
    for t in graph.node_types:
        if t.name not in blocks:
            raise ValueError(f"embeddings at {args.embeddings} miss node type '{t.name}'")
        if blocks[t.name].shape[0] != t.count:
            raise ValueError(
                f"embedding block '{t.name}' has {blocks[t.name].shape[0]} rows, "
                f"graph declares {t.count}"
            )
    emb_dir = Path(args.embeddings)
    kind = meta.get("kind", "alignment")

    def target_for(rel_name: str) -> np.ndarray:
        if args.target == "adjacency":
            return graph.adjacency(rel_name)
        spath = emb_dir / f"scores_{rel_name}.csv"
        if not spath.exists():
            raise ValueError(
                f"--target scores requires planted score files; {spath} not found"
            )
        return io.read_matrix(spath)

    if kind == "alignment":
        cfg = SolverConfig.from_dict(meta["config"])
        ops = operators_for(graph, cfg)
        operator_for = {rel.name: ops.operator(rel) for rel in graph.relations}
        trace = list(meta.get("objective_trace", []))
    elif kind == "planted":
        operator_for = {
            rel.name: io.read_matrix(emb_dir / f"operator_{rel.name}.csv")
            for rel in graph.relations
        }
        trace = []
    elif kind == "baseline":
        operator_for = {
            rel.name: _fit_operator(
                blocks[rel.src_type], blocks[rel.dst_type], target_for(rel.name)
            )
            for rel in graph.relations
        }
        trace = []
    else:
        raise ValueError(f"unknown embedding kind '{kind}' in {emb_dir / io.RUN_META}")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    per_rel = {}
    for rel in graph.relations:
        frob, rel_err, error_map = relation_recon_error(
            blocks[rel.src_type], operator_for[rel.name], blocks[rel.dst_type],
            target_for(rel.name),
        )
        map_path = out_dir / f"errmap_{rel.name}.csv"
        io.write_matrix(map_path, error_map)
        per_rel[rel.name] = RelationError(frob, rel_err, str(map_path))
    separation = None
    if len(graph.node_types) >= 2:
        separation = type_separation_score({t.name: blocks[t.name] for t in graph.node_types})
    report = DiagnosticsReport(
        objective_trace=trace,
        per_relation_error=per_rel,
        type_separation=separation,
        per_type_norms={t.name: float(np.linalg.norm(blocks[t.name])) for t in graph.node_types},
    )
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    sep = f"{separation:.6g}" if separation is not None else "n/a"
    print(
        f"diagnosed {len(per_rel)} relation(s) against {args.target}; "
        f"mean relative error {report.mean_relative_error():.6g}; "
        f"type separation {sep}; wrote {report_path}"
    )
    return 0


def _cmd_synth(args) -> int:
    spec_path = Path(args.spec)
    if not spec_path.exists():
        raise FileNotFoundError(f"{spec_path}: no such file")
    try:
        spec = SynthSpec.from_dict(json.loads(spec_path.read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{spec_path}: invalid JSON ({exc})") from exc
    except KeyError as exc:
        raise ValueError(f"{spec_path}: missing field {exc}") from exc
    manifest = generate(spec, args.out)
    print(f"generated synthetic dataset at {manifest}")
    return 0


_COMMANDS = {
    "align": _cmd_align,
    "baseline": _cmd_baseline,
    "diagnose": _cmd_diagnose,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)

    threads = getattr(args, "threads", 0)
    if threads and threads > 0:
        from threadpoolctl import threadpool_limits

        limits = threadpool_limits(limits=threads)
    else:
        limits = nullcontext()

    try:
        with limits:
            return _COMMANDS[args.command](args)
    except Exception as exc:
        message = str(exc).replace("\n", " ")
        print(f"error: {message}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
