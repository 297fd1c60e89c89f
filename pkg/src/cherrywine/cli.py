"""Command-line interface: fit, enumerate, evaluate, density, export.

All commands are deterministic given identical inputs and flags; model
files are versioned JSON written with sorted keys so a re-run reproduces
them byte for byte.  Logs go to stderr, results to stdout or files.

Exit codes: 0 success, 2 usage or precondition violation, 3 data/model
integrity failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .errors import (
    CherryWineError,
    DataError,
    ModelError,
    NumericalError,
    PreconditionError,
)
from .greedy import build_tcherry_greedy
from .infotheory import InfoCache
from .ingest import (
    Partition,
    default_bin_count,
    discretize,
    load_csv,
    uniform_partition,
)
from .junction import (
    TCherryJunctionTree,
    junction_to_dot,
    tcherry_from_junction,
    tree_weight,
    validate_tcherry_tree,
)
from .paircopula import (
    MarginalModel,
    PairCopulaAssignment,
    fit_gaussian_assignment,
    vine_density,
)
from .vine import (
    VineStructure,
    cherry_to_vine,
    enumerate_cherry_wines,
    validate_vine,
    vine_level_to_dot,
)

MODEL_VERSION = "cherrywine/1"


# ---------------------------------------------------------------------------
# Model file
# ---------------------------------------------------------------------------


def _tcherry_to_json(tree: TCherryJunctionTree) -> dict:
    return {
        "k": tree.k,
        "clusters": [list(c) for c in tree.clusters],
        "edges": [[i, j] for i, j, _ in tree.edges],
        "cherries": [[v, list(s)] for v, s in tree.cherries],
    }


def _tcherry_from_json(obj: dict) -> TCherryJunctionTree:
    try:
        base = tcherry_from_junction(obj["clusters"], obj["edges"], obj["k"])
        tree = TCherryJunctionTree(
            base.clusters,
            base.edges,
            k=int(obj["k"]),
            cherries=tuple((int(v), tuple(s)) for v, s in obj["cherries"]),
        )
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise ModelError(f"stored junction tree is malformed: {exc}") from None
    report = validate_tcherry_tree(tree)
    if not report.ok:
        raise ModelError(f"stored junction tree fails validation: {report}")
    return tree


def save_model(path: str, model: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            model = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model file {path}: {exc}") from None
    if not isinstance(model, dict) or model.get("version") != MODEL_VERSION:
        raise ModelError(
            f"unrecognized model version {model.get('version')!r}"
            if isinstance(model, dict)
            else "model file is not a JSON object"
        )
    required = ("dataset", "partition", "tcherry", "vine")
    for key in required:
        if key not in model:
            raise ModelError(f"model file is missing the {key!r} section")
    _tcherry_from_json(model["tcherry"])
    try:
        vine = VineStructure.from_json_dict(model["vine"])
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise ModelError(f"stored vine is malformed: {exc}") from None
    report = validate_vine(vine)
    if not report.ok:
        raise ModelError(f"stored vine fails validation: {report}")
    return model


def model_tree(model: dict) -> TCherryJunctionTree:
    return _tcherry_from_json(model["tcherry"])


def model_vine(model: dict) -> VineStructure:
    return VineStructure.from_json_dict(model["vine"])


def model_partition(model: dict) -> Partition:
    return Partition.from_json_dict(model["partition"])


def model_assignment(model: dict) -> PairCopulaAssignment:
    if model.get("assignment"):
        return PairCopulaAssignment.from_json_dict(model["assignment"])
    return PairCopulaAssignment()


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cluster_key(c) -> str:
    return ",".join(str(v) for v in c)


def cmd_fit(args) -> int:
    data = load_csv(args.input)
    if args.k > data.d:
        raise PreconditionError(
            f"order exceeds dimension (k={args.k} > d={data.d})"
        )
    bins = args.bins if args.bins is not None else default_bin_count(data.N)
    partition = uniform_partition(data, bins)
    ds = discretize(data, partition)
    cache = InfoCache(ds)
    result = build_tcherry_greedy(ds, args.k, cache=cache)
    for entry in result.trace:
        print(entry, file=sys.stderr)
    wine = cherry_to_vine(result.tree)
    assignment = None
    if args.fit_pairs == "gaussian":
        assignment = fit_gaussian_assignment(wine, ds)

    joint_info = cache(tuple(range(1, data.d + 1)))
    diagnostics = {
        "total_weight_bits": result.total_weight,
        "joint_information_bits": joint_info,
        "kl_gap_bits": joint_info - result.total_weight,
        "per_cluster_information_bits": {
            _cluster_key(c): cache(c) for c in result.tree.clusters
        },
        "plugin_bias_bound_bits": _bias_bound(data.d, max(ds.m), args.k, data.N),
    }
    if args.policy == "enumerate":
        diagnostics["variant_count"] = len(enumerate_cherry_wines(result.tree))

    model = {
        "version": MODEL_VERSION,
        "dataset": {
            "rows": data.N,
            "cols": data.d,
            "names": list(data.names),
            "sha256": data.source_sha256,
        },
        "partition": partition.to_json_dict(),
        "tcherry": _tcherry_to_json(result.tree),
        "vine": wine.to_json_dict(),
        "assignment": assignment.to_json_dict() if assignment else None,
        "diagnostics": diagnostics,
    }
    save_model(args.output, model)
    print(f"total_weight_bits={result.total_weight:.6f}")
    return 0


def _bias_bound(d: int, m: int, k: int, N: int) -> float:
    return 2.0 * d * math.log2(m) * m**k / N


def cmd_enumerate(args) -> int:
    model = load_model(args.model)
    tree = model_tree(model)
    wines = enumerate_cherry_wines(tree)
    print(f"variants={len(wines)}")
    for idx, wine in enumerate(wines, start=1):
        labels = " ".join(e.label() for e in wine.all_edges())
        print(f"variant {idx}: {labels}")
    return 0


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    data = load_csv(args.data)
    if data.d != model["dataset"]["cols"]:
        raise PreconditionError(
            f"data has {data.d} columns, model expects {model['dataset']['cols']}"
        )
    partition = model_partition(model)
    ds = discretize(data, partition)
    tree = model_tree(model)
    cache = InfoCache(ds)
    weight = tree_weight(tree, cache)
    joint_info = cache(tuple(range(1, data.d + 1)))
    print(f"total_weight_bits={weight:.6f}")
    print(f"joint_information_bits={joint_info:.6f}")
    print(f"kl_gap_bits={joint_info - weight:.6f}")
    for c in tree.clusters:
        print(f"cluster_information_bits {_cluster_key(c)}={cache(c):.6f}")
    bound = _bias_bound(data.d, max(ds.m), tree.k, data.N)
    print(
        f"plugin_bias_bound_bits={bound:.6f} "
        "(weights below this level are indistinguishable from estimation noise)"
    )
    return 0


def cmd_density(args) -> int:
    model = load_model(args.model)
    data = load_csv(args.data)
    if data.d != model["dataset"]["cols"]:
        raise PreconditionError(
            f"data has {data.d} columns, model expects {model['dataset']['cols']}"
        )
    vine = model_vine(model)
    assignment = model_assignment(model)
    marginals = MarginalModel.from_partition(model_partition(model))
    dens = vine_density(vine, assignment, marginals, data.values)
    out = sys.stdout if args.output is None else open(args.output, "w")
    try:
        for value in dens:
            logd = math.log(value) if value > 0 else float("-inf")
            print(f"{logd:.12g}", file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_export(args) -> int:
    model = load_model(args.model)
    if args.format == "json":
        payload = {
            "tcherry": model["tcherry"],
            "vine": model["vine"],
            "assignment": model.get("assignment"),
        }
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
        print(args.output)
    elif args.format == "dot":
        tree = model_tree(model)
        vine = model_vine(model)
        written = []
        path = f"{args.output}.junction.dot"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(junction_to_dot(tree))
        written.append(path)
        for ell in range(1, vine.truncation + 1):
            path = f"{args.output}.tree{ell}.dot"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(vine_level_to_dot(vine, ell))
            written.append(path)
        for path in written:
            print(path)
    else:
        raise PreconditionError(f"unknown format {args.format!r}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing and dispatch
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cherrywine",
        description=(
            "Learn truncated vine copula structures from multivariate samples "
            "via information-weighted cherry junction trees."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="learn a structure from a CSV sample")
    fit.add_argument("--input", required=True, help="CSV sample file")
    fit.add_argument("--k", type=int, required=True, help="cluster order k >= 2")
    fit.add_argument(
        "--bins",
        type=int,
        default=None,
        help="bins per variable (default: floor(sqrt(N)) clamped to [2, 32])",
    )
    fit.add_argument("--output", required=True, help="model file to write")
    fit.add_argument(
        "--fit-pairs",
        choices=("none", "gaussian"),
        default="none",
        help="optionally fit gaussian pair copulas to the learned vine",
    )
    fit.add_argument(
        "--policy",
        choices=("deterministic", "enumerate"),
        default="deterministic",
        help="vine conversion policy; 'enumerate' also counts all variants",
    )
    fit.add_argument(
        "--seed",
        type=int,
        default=0,
        help="seed for stochastic extensions; the fit pipeline is deterministic",
    )
    fit.set_defaults(func=cmd_fit)

    enum = sub.add_parser(
        "enumerate", help="list all vine structures of a fitted junction tree"
    )
    enum.add_argument("--model", required=True, help="model file from fit")
    enum.set_defaults(func=cmd_enumerate)

    ev = sub.add_parser("evaluate", help="weights and KL diagnostics on data")
    ev.add_argument("--model", required=True, help="model file from fit")
    ev.add_argument("--data", required=True, help="CSV data file")
    ev.set_defaults(func=cmd_evaluate)

    dens = sub.add_parser(
        "density", help="natural-log vine density per data row"
    )
    dens.add_argument("--model", required=True, help="model file from fit")
    dens.add_argument("--data", required=True, help="CSV of evaluation points")
    dens.add_argument("--output", default=None, help="write to file instead of stdout")
    dens.set_defaults(func=cmd_density)

    exp = sub.add_parser("export", help="export structures as JSON or DOT")
    exp.add_argument("--model", required=True, help="model file from fit")
    exp.add_argument("--format", choices=("json", "dot"), required=True)
    exp.add_argument("--output", required=True, help="output file (or prefix for dot)")
    exp.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"cherrywine: {exc}", file=sys.stderr)
        return 2
    except (DataError, ModelError) as exc:
        print(f"cherrywine: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"cherrywine: {exc}", file=sys.stderr)
        return 4
    except CherryWineError as exc:
        print(f"cherrywine: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
