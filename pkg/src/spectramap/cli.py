"""Command-line front end: data generation, embedding, verification, kernel fit.

Flag values override an optional key=value config file (--config); every
effective value is echoed into the run's JSON report so results reproduce
from the report alone.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import equivalence
from .datasets import LabeledDataset, gen_blobs, gen_two_moons, load_csv, save_csv
from .errors import ConfigurationError
from .fuzzy import build_similarity_graph
from .kernels import KernelParams, fit_ab
from .optim import OptimizerConfig, init_embedding, optimize
from .svgplot import svg_scatter


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags take precedence")
    p.add_argument("--seed", type=int, default=42)


def _add_data_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="CSV of points (optional final label column)")
    p.add_argument("--has-labels", action="store_true")
    p.add_argument("--gen", choices=["blobs", "moons"], help="synthetic source")
    p.add_argument("--n", type=int, default=100, help="total points to generate")
    p.add_argument("--std", type=float, default=0.5, help="blob standard deviation")
    p.add_argument("--noise", type=float, default=0.05, help="moons noise level")
    p.add_argument("--clusters", type=int, default=2, help="blob count")
    p.add_argument("--data-dim", type=int, default=2, help="ambient dimension (blobs)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectramap",
        description="Fuzzy k-NN graph embedding and its spectral test bench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic labeled dataset")
    _add_common(g)
    _add_data_source(g)
    g.add_argument("--out", required=True, help="output CSV path")

    e = sub.add_parser("embed", help="run the full embedding pipeline")
    _add_common(e)
    _add_data_source(e)
    e.add_argument("--k", type=int, default=15)
    e.add_argument("--dim", type=int, default=2)
    e.add_argument("--min-dist", type=float, default=0.1)
    e.add_argument("--kernel", choices=["cauchy", "gaussian"], default="cauchy")
    e.add_argument("--tau", type=float, default=1.0)
    e.add_argument("--a", type=float, help="override the fitted kernel a")
    e.add_argument("--b", type=float, help="override the fitted kernel b")
    e.add_argument("--epochs", type=int, default=200)
    e.add_argument("--neg", type=int, default=5)
    e.add_argument("--lr", type=float, default=1.0)
    e.add_argument("--clip", type=float, default=4.0)
    e.add_argument("--eps", type=float, default=1e-3)
    e.add_argument("--init", choices=["spectral", "random"], default="spectral")
    e.add_argument("--move-other", action="store_true")
    e.add_argument("--samples-per-epoch", type=int)
    e.add_argument("--dump-graph", action="store_true")
    e.add_argument("--out-dir", required=True)

    v = sub.add_parser("verify", help="run the spectral-equivalence claim suite")
    _add_common(v)
    v.add_argument("--claims", help="comma-separated claim ids to run")
    v.add_argument("--draws", type=int, default=200_000)
    v.add_argument("--out-dir", required=True)
    v.add_argument("--sabotage", choices=equivalence.SABOTAGE_MODES,
                   help=argparse.SUPPRESS)

    f = sub.add_parser("fit-ab", help="fit kernel (a, b) from min-dist")
    _add_common(f)
    f.add_argument("--min-dist", type=float, default=0.1)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold `key=value` lines of --config into defaults; flags still win."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    overrides = {}
    for line in Path(known.config).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line is not key=value: {line!r}")
        key, value = line.split("=", 1)
        overrides[key.strip().replace("-", "_")] = value.strip()
    for sub_action in parser._subparsers._group_actions:
        for sp in sub_action.choices.values():
            defaults = {}
            for action in sp._actions:
                if action.dest in overrides:
                    raw = overrides[action.dest]
                    if action.type is not None:
                        defaults[action.dest] = action.type(raw)
                    elif isinstance(action.const, bool) or isinstance(
                        action.default, bool
                    ):
                        defaults[action.dest] = raw.lower() in ("1", "true", "yes")
                    else:
                        defaults[action.dest] = raw
            sp.set_defaults(**defaults)
    return argv


def _make_dataset(args) -> LabeledDataset:
    if args.input:
        return load_csv(args.input, has_labels=args.has_labels)
    if args.gen == "moons":
        return gen_two_moons(args.n, args.noise, args.seed)
    if args.gen == "blobs":
        per = max(1, args.n // args.clusters)
        centers = np.zeros((args.clusters, args.data_dim))
        centers[:, 0] = 10.0 * np.arange(args.clusters)
        return gen_blobs(per, centers, args.std, args.seed)
    raise ConfigurationError("provide --input or --gen {blobs,moons}")


def _effective_config(args) -> dict:
    return {
        k: v for k, v in sorted(vars(args).items()) if k not in ("command",)
    }


def cmd_gen_data(args) -> int:
    ds = _make_dataset(args)
    save_csv(ds, args.out, with_labels=True)
    print(f"wrote {ds.data.n} points x {ds.data.dim} dims to {args.out}")
    return 0


def _resolve_kernel(args) -> tuple[KernelParams, dict]:
    info = {}
    if args.kernel == "gaussian":
        return KernelParams.gaussian(args.tau), info
    if args.a is not None and args.b is not None:
        return KernelParams.cauchy(args.a, args.b), info
    fit = fit_ab(args.min_dist)
    info = {"fitted_a": fit.fitted_a, "fitted_b": fit.fitted_b,
            "fit_rmse": fit.fit_rmse}
    a = args.a if args.a is not None else fit.fitted_a
    b = args.b if args.b is not None else fit.fitted_b
    return KernelParams.cauchy(a, b), info


def cmd_embed(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        ds = _make_dataset(args)
    except Exception as exc:
        print(f"error [datasets]: {exc}", file=sys.stderr)
        return 2
    try:
        V = build_similarity_graph(ds.data, args.k)
    except Exception as exc:
        print(f"error [graph, k={args.k}]: {exc}", file=sys.stderr)
        return 2
    kernel, fit_info = _resolve_kernel(args)
    cfg = OptimizerConfig(
        n_epochs=args.epochs,
        n_neg=args.neg,
        initial_lr=args.lr,
        clip=args.clip,
        eps=args.eps,
        seed=args.seed,
        move_other=args.move_other,
        samples_per_epoch=args.samples_per_epoch,
    )
    try:
        Y0 = init_embedding(V, args.dim, args.init, args.seed)
        result = optimize(V, Y0, kernel, cfg)
    except Exception as exc:
        print(f"error [optimizer, init={args.init}]: {exc}", file=sys.stderr)
        return 2

    emb_path = out_dir / "embedding.csv"
    coords = result.embedding.coords
    with emb_path.open("w") as fh:
        header = [f"y{i}" for i in range(coords.shape[1])] + ["label"]
        fh.write(",".join(header) + "\n")
        for row, lab in zip(coords, ds.labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{int(lab)}\n")

    result.write_trace_jsonl(out_dir / "trace.jsonl")
    svg_scatter(coords, ds.labels, out_dir / "scatter.svg")
    if args.dump_graph:
        V.save_edge_list(out_dir / "graph.txt")

    report = {
        "config": _effective_config(args),
        "kernel": {"family": kernel.family, "a": kernel.a, "b": kernel.b,
                   "tau": kernel.tau, **fit_info},
        "n": ds.data.n,
        "graph_nnz": V.nnz,
        "self_collisions": result.self_collisions,
        "initial_total": result.trace[0].loss.total if result.trace[0].loss else None,
        "final_total": result.trace[-1].loss.total if result.trace[-1].loss else None,
    }
    (out_dir / "run.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"embedded {ds.data.n} points into {coords.shape[1]} dims; "
          f"outputs in {out_dir}")
    return 0


def cmd_verify(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    claims = args.claims.split(",") if args.claims else None
    result = equivalence.run_suite(
        master_seed=args.seed,
        claims=claims,
        n_draws=args.draws,
        sabotage=args.sabotage,
    )
    (out_dir / "report.json").write_text(result.to_json() + "\n")
    table = equivalence.format_table(result)
    (out_dir / "report.txt").write_text(table + "\n")
    print(table)
    if not result.all_passed:
        failed = [r.claim for r in result.reports if not r.passed]
        print(f"FAILED claims: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_fit_ab(args) -> int:
    fit = fit_ab(args.min_dist)
    print(f"min_dist={fit.min_dist} a={fit.fitted_a:.6f} b={fit.fitted_b:.6f} "
          f"rmse={fit.fit_rmse:.6e}")
    return 0


COMMANDS = {
    "gen-data": cmd_gen_data,
    "embed": cmd_embed,
    "verify": cmd_verify,
    "fit-ab": cmd_fit_ab,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _apply_config_file(parser, argv)
    args = parser.parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
