"""Command-line interface: ``credit-pricer <stage> --config run.json --out DIR``.

Stages read and write a run directory with one sub-directory per seed::

    DIR/seed_<S>/dataset.csv        gen-data
    DIR/seed_<S>/truth.json         gen-data
    DIR/seed_<S>/response_plain.json, response_fdpe.json   fit-response
    DIR/seed_<S>/agent/             train (per-epoch checkpoints)
    DIR/seed_<S>/prices_<kind>.csv  optimize, train
    DIR/report.csv, DIR/summary.md, DIR/seed_<S>/cumulative.svg   evaluate
    DIR/ablation.csv, DIR/ablation_trace.csv                      ablate
    DIR/explain.csv, DIR/explain.svg                              explain

Each stage also writes ``manifest_<stage>.json`` with the resolved config,
the seed and git-style content hashes of its inputs and outputs.  No
timestamps are recorded, so re-running a stage reproduces identical files.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .baselines import BehavioralPolicy, expected_reward_curve, opt_policy, optimize_price
from .config import RunConfig, load_config
from .cql import CQLPricer
from .evaluation import (
    alpha_ablation,
    default_evaluators,
    evaluate,
    summary_markdown,
    sweep_summary,
    write_reports_csv,
)
from .exceptions import NumericalError, ValidationError
from .market import (
    PRICE_BOUNDS,
    TrueDemand,
    read_dataset_csv,
    simulate_market,
    write_dataset_csv,
)
from .plotting import write_svg
from .response import LogisticResponse, diagnostics, load_model, save_model

log = logging.getLogger("credit_pricer")

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
POLICIES = ("behavioral", "cql", "opt", "opt-fdpe")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def git_blob_hash(path) -> str:
    """SHA-1 of ``"blob <size>\\0" + content``, as ``git hash-object`` computes."""
    data = Path(path).read_bytes()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def _hash_tree(paths) -> dict:
    out = {}
    for p in paths:
        p = Path(p)
        if p.is_dir():
            for f in sorted(x for x in p.rglob("*") if x.is_file()):
                out[str(f)] = git_blob_hash(f)
        elif p.exists():
            out[str(p)] = git_blob_hash(p)
    return out


def _relative(hashes: dict, root: Path) -> dict:
    return {str(Path(k).relative_to(root)) if Path(k).is_relative_to(root) else k: v
            for k, v in hashes.items()}


def write_manifest(directory: Path, stage: str, config: RunConfig, seed, inputs, outputs,
                   extra: dict | None = None) -> None:
    doc = {
        "stage": stage,
        "package_version": __version__,
        "seed": seed,
        "config": config.to_dict(),
        "inputs": _relative(_hash_tree(inputs), directory),
        "outputs": _relative(_hash_tree(outputs), directory),
    }
    if extra:
        doc.update(extra)
    (directory / f"manifest_{stage}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _seed_dir(out: Path, seed: int) -> Path:
    return out / f"seed_{seed}"


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise ValidationError(f"missing {path}; run `{hint}` first")
    return path


def _load_truth(path: Path) -> TrueDemand:
    return TrueDemand.from_dict(json.loads(path.read_text()))


def _write_prices(path: Path, data: pd.DataFrame, prices) -> None:
    frame = pd.DataFrame({"AppIndex": data["AppIndex"].to_numpy(), "price": np.asarray(prices, dtype=float)})
    frame.to_csv(path, index=False, lineterminator="\n")


def _read_prices(path: Path, data: pd.DataFrame) -> np.ndarray:
    frame = pd.read_csv(path, float_precision="round_trip")
    if list(frame.columns) != ["AppIndex", "price"]:
        raise ValidationError(f"{path}: expected columns AppIndex, price")
    lookup = frame.set_index("AppIndex")["price"]
    missing = set(data["AppIndex"]) - set(lookup.index)
    if missing:
        raise ValidationError(f"{path}: no price for {len(missing)} rows")
    return lookup.loc[data["AppIndex"]].to_numpy(dtype=float)


def _split(data: pd.DataFrame, name: str) -> pd.DataFrame:
    rows = data[data["split"] == name]
    if rows.empty:
        raise ValidationError(f"dataset has no '{name}' rows")
    return rows


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------


def stage_gen_data(cfg: RunConfig, out: Path) -> None:
    for seed in cfg.seeds:
        d = _seed_dir(out, seed)
        d.mkdir(parents=True, exist_ok=True)
        data, demand = simulate_market(cfg.market_for(seed), cfg.reward)
        write_dataset_csv(data, d / "dataset.csv")
        (d / "truth.json").write_text(json.dumps(demand.to_dict(), indent=2, sort_keys=True) + "\n")
        write_manifest(d, "gen-data", cfg, seed, [], [d / "dataset.csv", d / "truth.json"],
                       {"rows": len(data), "accept_rate": float(data["accept"].mean()),
                        "mean_realized_reward": float(data["realized_reward"].mean())})
        log.info("seed %d: %d rows, accept rate %.3f", seed, len(data), data["accept"].mean())


def stage_fit_response(cfg: RunConfig, out: Path) -> None:
    for seed in cfg.seeds:
        d = _seed_dir(out, seed)
        data = read_dataset_csv(_require(d / "dataset.csv", "gen-data"))
        train, test = _split(data, "train"), _split(data, "test")
        outputs = []
        for variant in ("plain", "fdpe"):
            opts = cfg.response
            model = LogisticResponse(variant=variant, l2=opts.l2, max_iter=opts.max_iter, tol=opts.tol)
            model.fit(train)
            diag = {"train": diagnostics(model, train), "test": diagnostics(model, test)}
            path = d / f"response_{variant}.json"
            save_model(path, model, diag)
            outputs.append(path)
            log.info("seed %d %s: train AUC %.3f, pseudo-R2 %.3f", seed, variant,
                     diag["train"]["auc"], diag["train"]["pseudo_r2"])
        write_manifest(d, "fit-response", cfg, seed, [d / "dataset.csv"], outputs)


def stage_train(cfg: RunConfig, out: Path, alpha: float | None = None) -> None:
    for seed in cfg.seeds:
        d = _seed_dir(out, seed)
        data = read_dataset_csv(_require(d / "dataset.csv", "gen-data"))
        train, test = _split(data, "train"), _split(data, "test")
        agent_dir = d / "agent"
        pricer = CQLPricer(cfg.agent_for(seed, alpha), checkpoint_dir=agent_dir).fit(train)
        pricer.save(agent_dir / "final")
        _write_prices(d / "prices_cql.csv", test, pricer.predict(test))
        write_manifest(d, "train", cfg, seed, [d / "dataset.csv"], [agent_dir, d / "prices_cql.csv"],
                       {"dropout_placement": "critics", "fixed_alpha": alpha})


def stage_optimize(cfg: RunConfig, out: Path) -> None:
    for seed in cfg.seeds:
        d = _seed_dir(out, seed)
        data = read_dataset_csv(_require(d / "dataset.csv", "gen-data"))
        test = _split(data, "test")
        outputs = []
        for variant, kind in (("plain", "opt"), ("fdpe", "opt-fdpe")):
            model = load_model(_require(d / f"response_{variant}.json", "fit-response"))
            policy = opt_policy(test, model, cfg.reward, n_jobs=cfg.jobs)
            path = d / f"prices_{kind}.csv"
            _write_prices(path, test, policy.predict(test))
            outputs.append(path)
        write_manifest(d, "optimize", cfg, seed,
                       [d / "dataset.csv", d / "response_plain.json", d / "response_fdpe.json"], outputs)


def stage_evaluate(cfg: RunConfig, out: Path) -> None:
    reports, sweep_rows = [], []
    inputs = []
    for seed in cfg.seeds:
        d = _seed_dir(out, seed)
        data = read_dataset_csv(_require(d / "dataset.csv", "gen-data"))
        truth = _load_truth(_require(d / "truth.json", "gen-data"))
        test = _split(data, "test")
        prices = {"behavioral": BehavioralPolicy().predict(test)}
        for kind in ("cql", "opt", "opt-fdpe"):
            path = d / f"prices_{kind}.csv"
            if path.exists():
                prices[kind] = _read_prices(path, test)
                inputs.append(path)
        inputs += [d / "dataset.csv", d / "truth.json"]

        evaluators = default_evaluators(data, seed)
        evaluators = {k: v for k, v in evaluators.items() if k in cfg.evaluators}
        curves = {}
        for name, p in prices.items():
            rep = evaluate(p, test, truth, cfg.reward, true_model=truth, policy_id=name,
                           evaluator_id="truth", seed=seed)
            reports.append(rep)
            curves[name] = (np.arange(1, len(test) + 1), rep.cumulative_curve)
            for r in (sweep := [evaluate(p, test, m, cfg.reward, policy_id=name, evaluator_id=k, seed=seed)
                                for k, m in evaluators.items()]):
                reports.append(r)
            sweep_rows.append({"seed": seed, "policy": name, **sweep_summary(sweep)})
        write_svg(d / "cumulative.svg", curves, title=f"Cumulative expected reward (seed {seed})",
                  xlabel="test application", ylabel="expected reward ($)")

    write_reports_csv(reports, out / "report.csv")
    pd.DataFrame(sweep_rows).to_csv(out / "sensitivity.csv", index=False, float_format="%.10g",
                                    lineterminator="\n")
    truth_reports = [r for r in reports if r.evaluator == "truth"]
    text = summary_markdown(truth_reports, "Policies under the true demand model")
    text += "\n" + summary_markdown([r for r in reports if r.evaluator != "truth"],
                                    "Sensitivity to the evaluation model")
    (out / "summary.md").write_text(text)
    outputs = [out / "report.csv", out / "sensitivity.csv", out / "summary.md"]
    write_manifest(out, "evaluate", cfg, list(cfg.seeds), inputs, outputs)


def stage_ablate(cfg: RunConfig, out: Path) -> None:
    tables, traces = [], []
    for seed in cfg.seeds:
        d = _seed_dir(out, seed)
        data = read_dataset_csv(_require(d / "dataset.csv", "gen-data"))
        truth = _load_truth(_require(d / "truth.json", "gen-data"))
        table, trace = alpha_ablation(data, cfg.ablation_alphas, cfg.agent, truth, seeds=(seed,),
                                      n_rows=cfg.ablation_rows, reward_params=cfg.reward)
        tables.append(table)
        traces.append(trace)
    out.mkdir(parents=True, exist_ok=True)
    pd.concat(tables).to_csv(out / "ablation.csv", index=False, float_format="%.10g", lineterminator="\n")
    pd.concat(traces).to_csv(out / "ablation_trace.csv", index=False, float_format="%.10g",
                             lineterminator="\n")
    write_manifest(out, "ablate", cfg, list(cfg.seeds),
                   [_seed_dir(out, s) / "dataset.csv" for s in cfg.seeds],
                   [out / "ablation.csv", out / "ablation_trace.csv"])


def stage_explain(cfg: RunConfig, out: Path, row: int, model_path: str | None) -> None:
    seed = cfg.seeds[0]
    d = _seed_dir(out, seed)
    data = read_dataset_csv(_require(d / "dataset.csv", "gen-data"))
    matches = data[data["AppIndex"] == row]
    if matches.empty:
        raise ValidationError(f"no application with AppIndex {row}")
    app = matches.iloc[:1]
    if model_path in (None, "truth"):
        model = _load_truth(_require(d / "truth.json", "gen-data"))
        model_path = str(d / "truth.json")
    else:
        model = load_model(model_path)
    rates = np.round(np.linspace(*PRICE_BOUNDS, 1001), 10)
    grid = np.broadcast_to(rates, (1, len(rates)))
    p = model.accept_probability(app, grid)[0]
    reward = expected_reward_curve(app, model, grid, cfg.reward)[0]
    best = float(optimize_price(app, model, cfg.reward)[0])
    behavioral = float(app["offered_rate"].iloc[0])
    out.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({"rate": rates, "p_accept": p, "expected_reward": reward}).to_csv(
        out / "explain.csv", index=False, float_format="%.10g", lineterminator="\n")
    markers = {f"behavioral {behavioral:.2f}%": behavioral, f"optimal {best:.2f}%": best}
    write_svg(out / "explain_response.svg", {"p(accept)": (rates, p)}, title=f"Price response, application {row}",
              xlabel="APR (%)", ylabel="p(accept)", markers=markers)
    write_svg(out / "explain_reward.svg", {"expected reward": (rates, reward)},
              title=f"Expected reward, application {row}", xlabel="APR (%)", ylabel="$", markers=markers)
    (out / "explain.json").write_text(json.dumps(
        {"app_index": row, "behavioral_price": behavioral, "optimal_price": best,
         "optimal_expected_reward": float(expected_reward_curve(app, model, np.array([best]), cfg.reward)[0])},
        indent=2, sort_keys=True) + "\n")
    write_manifest(out, "explain", cfg, seed, [d / "dataset.csv", model_path],
                   [out / "explain.csv", out / "explain_response.svg", out / "explain_reward.svg",
                    out / "explain.json"])


def stage_pipeline(cfg: RunConfig, out: Path) -> None:
    stage_gen_data(cfg, out)
    stage_fit_response(cfg, out)
    stage_train(cfg, out)
    stage_optimize(cfg, out)
    stage_evaluate(cfg, out)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are validation errors
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="credit-pricer", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="run configuration JSON (defaults apply when omitted)")
        p.add_argument("--out", required=True, help="run directory")
        p.add_argument("--seed", type=int, help="run a single seed instead of the config's list")
        p.add_argument("--jobs", type=int, help="threads for row-parallel optimisation")
        p.add_argument("--family", help="override the demand family")
        return p

    add("gen-data", "simulate a market and write dataset.csv + truth.json")
    add("fit-response", "fit plain and FDPE logistic response models on the training split")
    p = add("train", "train the CQL agent and price the test split")
    p.add_argument("--alpha", type=float, help="hold alpha fixed at this value")
    add("optimize", "price the test split with the optimisation baselines")
    add("evaluate", "score all available policies; write report.csv and summary.md")
    p = add("ablate", "fixed-alpha ablation on the first test rows")
    p.add_argument("--alpha", type=float, help="a single alpha instead of the config's list")
    p = add("explain", "response and expected-reward curves for one application")
    p.add_argument("--row", type=int, required=True, help="AppIndex of the application")
    p.add_argument("--model", help="response model JSON, or 'truth' (default)")
    add("pipeline", "gen-data, fit-response, train, optimize and evaluate in sequence")
    return parser


def _configure_logging() -> None:
    level = os.environ.get("CREDIT_PRICER_LOG", "info").lower()
    if level not in LOG_LEVELS:
        raise ValidationError(f"CREDIT_PRICER_LOG must be one of {sorted(LOG_LEVELS)}")
    logging.basicConfig(level=LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)


def run(args: argparse.Namespace) -> None:
    cfg = load_config(args.config) if args.config else RunConfig()
    alpha = getattr(args, "alpha", None)
    cfg = cfg.with_overrides(seed=args.seed, family=args.family, jobs=args.jobs,
                             alpha=alpha if args.command == "ablate" else None)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.command == "gen-data":
        stage_gen_data(cfg, out)
    elif args.command == "fit-response":
        stage_fit_response(cfg, out)
    elif args.command == "train":
        stage_train(cfg, out, alpha)
    elif args.command == "optimize":
        stage_optimize(cfg, out)
    elif args.command == "evaluate":
        stage_evaluate(cfg, out)
    elif args.command == "ablate":
        stage_ablate(cfg, out)
    elif args.command == "explain":
        stage_explain(cfg, out, args.row, args.model)
    else:
        stage_pipeline(cfg, out)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _configure_logging()
        run(args)
    except ValidationError as exc:
        log.error("%s", exc)
        return 1
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return 1
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
