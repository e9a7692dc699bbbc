"""Command-line entry point: ``fundnet <command> ...``.

Exit codes: 0 success, 1 internal error (or failed ``verify``), 2 invalid
input or configuration. Every command writes its tables/summaries into
``--out-dir`` together with ``<command>.manifest.json``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .contagion import ShockConfig, propagate_shock, systemic_damage
from .ingest import (HoldingsParseError, Quarter, build_quarter_snapshot, consolidate_classes,
                     parse_class_map, parse_holdings)
from .metrics import (degree_ccdf, degree_pdf, herfindahl_all, index_ccdf, mean_indices,
                      pairwise_similarity)
from .network import HoldingNetwork, NetworkError, read_edges, snapshot_stats
from .nullmodels import RandomizationSpec, randomize
from .synth import SynthSpec, generate

log = logging.getLogger("fundnet")


class UsageError(Exception):
    """Invalid input or configuration (exit code 2)."""


class Outputs:
    """Collects output files, writes each atomically, then the run manifest."""

    def __init__(self, out_dir, command: str, args: argparse.Namespace):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.args = args
        self.files: dict[str, str] = {}

    def write_text(self, name: str, text: str) -> Path:
        path = self.dir / name
        _atomic_write(path, text.encode("utf-8"))
        self.files[name] = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return path

    def write_csv(self, name: str, header, rows) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return self.write_text(name, buf.getvalue())

    def write_json(self, name: str, obj) -> Path:
        return self.write_text(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def write_network(self, stem: str, net: HoldingNetwork) -> Path:
        rows = ((f, a, repr(v)) for f, a, v in net.records())
        path = self.write_csv(f"{stem}.csv", ("fund_id", "asset_id", "market_value"), rows)
        self.write_json(f"{stem}.json", snapshot_stats(net).to_json_dict(net.quarter))
        return path

    def finish(self, inputs=(), seeds=(), config=None) -> None:
        manifest = {
            "command": self.command,
            "argv": _echo_args(self.args),
            "inputs": {str(p): _sha256(p) for p in inputs},
            "seeds": list(seeds),
            "config": config or {},
            "tool_version": __version__,
            "outputs": dict(sorted(self.files.items())),
        }
        text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        _atomic_write(self.dir / f"{self.command}.manifest.json", text.encode("utf-8"))


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _echo_args(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _fmt(x) -> str:
    return repr(float(x))


def _load(path) -> HoldingNetwork:
    if not Path(path).exists():
        raise UsageError(f"no such snapshot: {path}")
    return read_edges(path)


def _shock_config(args) -> ShockConfig:
    return ShockConfig(delta0=args.delta0, steps=args.steps, impact=args.impact_c,
                       quantile=args.quantile)


# -- commands ----------------------------------------------------------------

def cmd_ingest(args) -> int:
    quarter = Quarter.parse(args.quarter)
    with open(args.holdings, newline="", encoding="utf-8") as fh:
        records = parse_holdings(fh)
    inputs = [args.holdings]
    if args.class_map:
        with open(args.class_map, newline="", encoding="utf-8") as fh:
            records = consolidate_classes(records, parse_class_map(fh))
        inputs.append(args.class_map)
    net = build_quarter_snapshot(records, quarter)
    out = Outputs(args.out_dir, "ingest", args)
    out.write_network(str(quarter), net)
    out.finish(inputs, config={"quarter": str(quarter)})
    print(json.dumps(snapshot_stats(net).to_json_dict(net.quarter)))
    return 0


def cmd_stats(args) -> int:
    net = _load(args.snapshot)
    stats = snapshot_stats(net).to_json_dict(net.quarter)
    out = Outputs(args.out_dir, "stats", args)
    out.write_json("stats.json", stats)
    out.finish([args.snapshot])
    print(json.dumps(stats))
    return 0


def cmd_metrics(args) -> int:
    net = _load(args.snapshot)
    if net.n_funds < 2:
        raise UsageError(f"pair metrics need at least 2 funds, snapshot has {net.n_funds}")
    out = Outputs(args.out_dir, "metrics", args)
    for side in ("fund", "asset"):
        out.write_csv(f"ccdf_{side}_degree.csv", ("value", "probability"),
                      ((_fmt(v), _fmt(p)) for v, p in degree_ccdf(net, side).rows()))
        centers, dens = degree_pdf(net, side, bins=args.bins)
        out.write_csv(f"pdf_{side}_degree.csv", ("value", "probability"),
                      ((_fmt(v), _fmt(p)) for v, p in zip(centers, dens)))
    h = herfindahl_all(net)
    out.write_csv("ccdf_h.csv", ("value", "probability"),
                  ((_fmt(v), _fmt(p)) for v, p in index_ccdf(h).rows()))

    pairs = pairwise_similarity(net, threads=args.threads)
    means = mean_indices(net, overlapping_only=args.overlapping_only, pairs=pairs)
    out.write_json("means.json", {"hbar": means.hbar, "jbar": means.jbar, "sbar": means.sbar})
    if args.pairs:
        ids = net.fund_ids
        out.write_csv("pairs.csv", ("fund_i", "fund_j", "jaccard", "similarity"),
                      ((ids[p.i], ids[p.j], _fmt(p.jaccard), _fmt(p.similarity)) for p in pairs))
        zeros = 0 if args.overlapping_only else net.n_funds * (net.n_funds - 1) // 2 - len(pairs)
        for name, col in (("jaccard", pairs.jaccard), ("similarity", pairs.similarity)):
            if len(col) + zeros == 0:
                continue
            table = index_ccdf(np.concatenate((col, np.zeros(zeros))))
            out.write_csv(f"ccdf_{name}.csv", ("value", "probability"),
                          ((_fmt(v), _fmt(p)) for v, p in table.rows()))
    out.finish([args.snapshot], config={"bins": args.bins, "pairs": args.pairs,
                                        "overlapping_only": args.overlapping_only})
    print(json.dumps({"hbar": means.hbar, "jbar": means.jbar, "sbar": means.sbar}))
    return 0


def cmd_randomize(args) -> int:
    try:
        spec = RandomizationSpec.parse(args.model)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    net = _load(args.snapshot)
    rnd = spec.apply(net)
    out = Outputs(args.out_dir, "randomize", args)
    path = out.write_network(f"{spec.model}_{spec.seed}", rnd)
    out.finish([args.snapshot], seeds=[spec.seed], config={"model": spec.model})
    print(path)
    return 0


def verify_randomization(original: HoldingNetwork, randomized: HoldingNetwork,
                         model: str) -> dict:
    """Conservation checks for a null-model output."""
    checks = {
        "edges": original.n_edges == randomized.n_edges,
        "weight_multiset": bool(np.array_equal(np.sort(original.edge_weight),
                                               np.sort(randomized.edge_weight))),
        "total_value": abs(original.total_value - randomized.total_value)
        <= 1e-9 * original.total_value,
    }
    if model == "rnd2":
        present = set(randomized.fund_ids.tolist())
        same_degree = same_weights = True
        for f in original.fund_ids:
            if f not in present:
                same_degree = same_weights = False
                break
            i, j = original.fund_index(f), randomized.fund_index(f)
            a = np.sort(original.edge_weight[original.fund_ptr[i]:original.fund_ptr[i + 1]])
            b = np.sort(randomized.edge_weight[randomized.fund_ptr[j]:randomized.fund_ptr[j + 1]])
            same_degree &= len(a) == len(b)
            same_weights &= bool(np.array_equal(a, b))
        checks["fund_degrees"] = same_degree
        checks["fund_weight_multisets"] = same_weights
    return checks


def cmd_verify(args) -> int:
    original, randomized = _load(args.original), _load(args.randomized)
    if args.model not in ("rnd1", "rnd2"):
        raise UsageError(f"unknown model {args.model!r}")
    checks = verify_randomization(original, randomized, args.model)
    ok = all(checks.values())
    out = Outputs(args.out_dir, "verify", args)
    out.write_json("verify.json", {"model": args.model, "ok": ok, "checks": checks})
    out.finish([args.original, args.randomized], config={"model": args.model})
    print(json.dumps({"ok": ok, "checks": checks}))
    return 0 if ok else 1


def cmd_shock(args) -> int:
    net = _load(args.snapshot)
    cfg = _shock_config(args)
    out = Outputs(args.out_dir, "shock", args)
    if args.asset is not None:
        try:
            traj = propagate_shock(net, args.asset, cfg)
        except KeyError as exc:
            raise UsageError(str(exc)) from None
        per_asset = {traj.asset: traj.damage}
    else:
        traj = systemic_damage(net, cfg, threads=args.threads)
        per_asset = traj.per_asset
    out.write_csv("trajectory.csv", ("t", "damage"),
                  ((t, _fmt(d)) for t, d in enumerate(traj.damage, start=1)))
    if args.price_loss:
        out.write_csv("price_loss.csv", ("t", "damage"),
                      ((t, _fmt(d)) for t, d in enumerate(traj.price_loss, start=1)))
    if args.per_asset:
        out.write_csv("trajectory_per_asset.csv", ("asset_id", "t", "damage"),
                      ((net.asset_ids[a], t, _fmt(d))
                       for a, dmg in per_asset.items() for t, d in enumerate(dmg, start=1)))
    out.finish([args.snapshot], config=_cfg_echo(cfg))
    print(_fmt(traj.damage[-1]))
    return 0


def _cfg_echo(cfg: ShockConfig) -> dict:
    return {"delta0": cfg.delta0, "steps": cfg.steps, "impact_c": cfg.impact,
            "quantile": cfg.quantile}


def cmd_compare(args) -> int:
    if args.n_seeds < 1:
        raise UsageError("compare needs at least one seed (--n-seeds >= 1)")
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    for m in models:
        if m not in ("rnd1", "rnd2"):
            raise UsageError(f"unknown model {m!r}; expected rnd1 and/or rnd2")
    net = _load(args.snapshot)
    cfg = _shock_config(args)
    seeds = [args.seed + k for k in range(args.n_seeds)]

    base = systemic_damage(net, cfg, threads=args.threads).damage
    rows = [("original", "", t, _fmt(d)) for t, d in enumerate(base, start=1)]
    means = {"original": base}
    for m in models:
        runs = []
        for s in seeds:
            dmg = systemic_damage(randomize(net, m, s), cfg, threads=args.threads).damage
            runs.append(dmg)
            rows.extend((m, s, t, _fmt(d)) for t, d in enumerate(dmg, start=1))
        means[m] = np.mean(runs, axis=0)

    out = Outputs(args.out_dir, "compare", args)
    out.write_csv("compare.csv", ("model", "seed", "t", "damage"), rows)
    labels = list(means)
    out.write_csv("compare_mean.csv", ("t", *labels),
                  ((t, *(_fmt(means[k][t - 1]) for k in labels))
                   for t in range(1, cfg.steps + 1)))
    out.finish([args.snapshot], seeds=seeds, config={**_cfg_echo(cfg), "models": models})
    print(json.dumps({k: float(v[-1]) for k, v in means.items()}))
    return 0


def cmd_synth(args) -> int:
    if args.spec:
        fields = json.loads(Path(args.spec).read_text())
        fields.setdefault("seed", args.seed)
    else:
        missing = [f for f in ("n_funds", "n_assets", "mean_degree") if getattr(args, f) is None]
        if missing:
            raise UsageError("synth needs --spec or --n-funds, --n-assets and --mean-degree")
        fields = {k: getattr(args, k) for k in (
            "n_funds", "n_assets", "mean_degree", "fund_exponent", "asset_exponent", "styles",
            "kappa", "weights", "weight_exponent", "size_exponent", "total_value", "quarter")
            if getattr(args, k) is not None}
        fields["seed"] = args.seed
    try:
        spec = SynthSpec(**fields)
    except TypeError as exc:
        raise UsageError(f"bad synth spec: {exc}") from None
    net = generate(spec)
    out = Outputs(args.out_dir, "synth", args)
    out.write_network("synth", net)
    out.write_json("synth_spec.json", spec.to_dict())
    out.finish([args.spec] if args.spec else [], seeds=[spec.seed], config=spec.to_dict())
    print(json.dumps(snapshot_stats(net).to_json_dict(net.quarter)))
    return 0


# -- parser --------------------------------------------------------------------

def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
    p.add_argument("--threads", type=int, default=1, help="worker cap (default 1)")
    p.add_argument("--out-dir", default=".", help="output directory (default: cwd)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _shock_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta0", type=float, default=0.5, help="initial shock (default 0.5)")
    p.add_argument("--steps", type=int, default=10, help="propagation steps (default 10)")
    p.add_argument("--impact-c", type=float, default=1.0, help="market impact coefficient")
    p.add_argument("--quantile", type=float, default=0.999, help="top-asset quantile")


def build_parser() -> argparse.ArgumentParser:
    g = _global_flags()
    parser = argparse.ArgumentParser(prog="fundnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fundnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[g], help="build a quarterly snapshot from holdings")
    p.add_argument("holdings", help="CSV fund_class_id,report_date,asset_id,market_value")
    p.add_argument("--class-map", help="CSV fund_class_id,fund_id")
    p.add_argument("--quarter", required=True, help="e.g. 2006Q2")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", parents=[g], help="summary statistics of a snapshot")
    p.add_argument("snapshot")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("metrics", parents=[g], help="diversification/similarity tables")
    p.add_argument("snapshot")
    p.add_argument("--pairs", action="store_true", help="write the O(N^2) pairwise table")
    p.add_argument("--bins", type=int, default=20, help="log bins for degree PDFs")
    p.add_argument("--overlapping-only", action="store_true",
                   help="average J and s over overlapping pairs only")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("randomize", parents=[g], help="draw a null-model network")
    p.add_argument("snapshot")
    p.add_argument("model", help="rnd1:<seed> or rnd2:<seed>")
    p.set_defaults(func=cmd_randomize)

    p = sub.add_parser("verify", parents=[g], help="check null-model conservation laws")
    p.add_argument("original")
    p.add_argument("randomized")
    p.add_argument("--model", required=True, help="rnd1 or rnd2")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("shock", parents=[g], help="simulate distress propagation")
    p.add_argument("snapshot")
    _shock_flags(p)
    p.add_argument("--asset", help="shock this asset only instead of the top-asset set")
    p.add_argument("--per-asset", action="store_true", help="also write per-asset trajectories")
    p.add_argument("--price-loss", action="store_true", help="also write mark-to-market loss")
    p.set_defaults(func=cmd_shock)

    p = sub.add_parser("compare", parents=[g], help="damage of original vs null models")
    p.add_argument("snapshot")
    _shock_flags(p)
    p.add_argument("--models", default="rnd1,rnd2")
    p.add_argument("--n-seeds", type=int, default=20, help="null-model realizations per model")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", parents=[g], help="generate a synthetic snapshot")
    p.add_argument("--spec", help="JSON file with SynthSpec fields")
    p.add_argument("--n-funds", type=int)
    p.add_argument("--n-assets", type=int)
    p.add_argument("--mean-degree", type=float)
    p.add_argument("--fund-exponent", type=float)
    p.add_argument("--asset-exponent", type=float)
    p.add_argument("--styles", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--weights", choices=("uniform", "powerlaw"))
    p.add_argument("--weight-exponent", type=float)
    p.add_argument("--size-exponent", type=float)
    p.add_argument("--total-value", type=float)
    p.add_argument("--quarter")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, NetworkError, HoldingsParseError, ValueError, OSError) as exc:
        print(f"fundnet {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        log.exception("internal error")
        return 1


if __name__ == "__main__":
    sys.exit(main())
