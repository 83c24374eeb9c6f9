"""Experiment orchestration: baselines, ShE, SE, DE across the split
fractions, with JSON/CSV reports and alpha/beta ablation curves.

Every (method, fraction) cell derives its own seed from the global seed
and a stable hash of the cell name, so adding or removing methods never
changes another method's numbers.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics, network, shallow
from .data import PRNG_NAME, EMB_VERSION, LabeledDataset, SplitPlan, make_splits
from .deep import KnowledgeSources, SHIFTED, fit_beta, reduce_kg, train_de
from .errors import EnsembleKitError
from .linalg import pca_fit, pca_transform
from .network import NET_VERSION, NetworkLayout, TrainConfig
from .semi import fuse, predict_se, train_se
from .shallow import ProbabilityTable, SimplexWeights, fit_alpha

SCHEMA_VERSION = 1
DEFAULT_FRACTIONS = (0.10, 0.15, 0.20, 0.25, 0.30)


@dataclass
class ExperimentConfig:
    dataset: LabeledDataset
    model_sources: list[str]
    methods: list[str]  # "baseline:<source>", "she", "se", "de"
    kg_cnet: str | None = None
    kg_wiki: str | None = None
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    seed: int = 42
    train: TrainConfig = field(default_factory=TrainConfig)
    pca_dim: int = 100
    hidden: tuple[int, ...] = (64,)
    reward_norm: str = SHIFTED
    alpha_step: float = 0.1
    beta_step: float = 0.1
    beta: float | None = None  # fixed beta skips the validation sweep
    jobs: int = 1

    def __post_init__(self):
        for m in self.methods:
            if m in ("she", "se", "de") or m.startswith("baseline:"):
                continue
            raise ValueError(f"unknown method {m!r}")
        if "she" in self.methods and len(self.model_sources) < 2:
            raise ValueError("she needs at least 2 model sources")
        if "de" in self.methods and (self.kg_cnet is None or self.kg_wiki is None):
            raise ValueError("de needs both knowledge-graph sources")
        for m in self.methods:
            if m.startswith("baseline:") and m.split(":", 1)[1] not in self.model_sources:
                raise ValueError(f"{m!r} is not a configured model source")


def derive_seed(seed: int, method: str, fraction: float) -> int:
    """Stable per-cell sub-seed: global seed xor a hash of the cell name."""
    digest = hashlib.sha256(f"{method}|{fraction:.6f}".encode()).digest()
    return seed ^ int.from_bytes(digest[:4], "little")


def _cfg_with_seed(cfg: TrainConfig, seed: int) -> TrainConfig:
    return TrainConfig(
        batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate,
        weight_decay=cfg.weight_decay,
        epochs=cfg.epochs,
        seed=seed,
        loss=cfg.loss,
        loss_sign=cfg.loss_sign,
    )


def _score(pred, gold, c):
    return {
        "accuracy": metrics.accuracy(pred, gold),
        "kappa": metrics.cohen_kappa(pred, gold, c),
        "confusion": metrics.confusion(pred, gold, c).counts.tolist(),
    }


class _FractionContext:
    """Lazily computed shared state for one split fraction."""

    def __init__(self, config: ExperimentConfig, fraction: float):
        self.config = config
        self.fraction = fraction
        self.split: SplitPlan = make_splits(config.dataset.m, [fraction], config.seed)[0]
        self.train_idx = np.asarray(self.split.train_indices, dtype=np.int64)
        self.test_idx = np.asarray(self.split.test_indices, dtype=np.int64)
        y = config.dataset.y
        self.train_y = y[self.train_idx]
        self.test_y = y[self.test_idx]
        self._baselines: dict[str, dict] = {}
        self._fused = None
        self._kg = None

    def baseline(self, source: str) -> dict:
        if source not in self._baselines:
            cfg = self.config
            seed = derive_seed(cfg.seed, f"baseline:{source}", self.fraction)
            mat = cfg.dataset.sources[source].vectors.astype(np.float64)
            pca = pca_fit(mat[self.train_idx], cfg.pca_dim)
            layout = NetworkLayout(
                input_dim=pca.output_dim, hidden=cfg.hidden,
                classes=cfg.dataset.num_classes,
            )
            net = network.init(layout, seed)
            net = network.train(
                net, pca_transform(pca, mat[self.train_idx]), self.train_y, None,
                _cfg_with_seed(cfg.train, seed),
            )
            train_probs = network.forward(net, pca_transform(pca, mat[self.train_idx]))
            test_probs = network.forward(net, pca_transform(pca, mat[self.test_idx]))
            self._baselines[source] = {
                "pca": pca,
                "net": net,
                "train_probs": train_probs,
                "test_probs": test_probs,
            }
        return self._baselines[source]

    def fused(self):
        if self._fused is None:
            self._fused = fuse(
                self.config.dataset, self.config.model_sources, self.split, self.config.pca_dim
            )
        return self._fused

    def kg(self):
        if self._kg is None:
            cfg = self.config
            train_fused, _ = self.fused()
            kg = KnowledgeSources(
                cnet=cfg.dataset.sources[cfg.kg_cnet], wiki=cfg.dataset.sources[cfg.kg_wiki]
            )
            self._kg = reduce_kg(kg, self.split, train_fused.pca.output_dim)
        return self._kg


def _run_cell(ctx: _FractionContext, method: str) -> dict:
    cfg = ctx.config
    c = cfg.dataset.num_classes
    row = {"method": method, "fraction": ctx.fraction, "alpha": None, "beta": None}
    try:
        if method.startswith("baseline:"):
            cell = ctx.baseline(method.split(":", 1)[1])
            pred = np.argmax(cell["test_probs"], axis=1)
            row.update(_score(pred, ctx.test_y, c))
        elif method == "she":
            train_tables = [
                ProbabilityTable(s, ctx.baseline(s)["train_probs"]) for s in cfg.model_sources
            ]
            alpha, _ = fit_alpha(train_tables, ctx.train_y, cfg.alpha_step)
            test_tables = [
                ProbabilityTable(s, ctx.baseline(s)["test_probs"]) for s in cfg.model_sources
            ]
            pred = shallow.predict(test_tables, alpha)
            row.update(_score(pred, ctx.test_y, c))
            row["alpha"] = [float(a) for a in alpha.alpha]
        elif method == "se":
            seed = derive_seed(cfg.seed, "se", ctx.fraction)
            train_fused, _ = ctx.fused()
            model = train_se(
                train_fused, ctx.train_y, _cfg_with_seed(cfg.train, seed),
                hidden=cfg.hidden, classes=c,
            )
            pred, _ = predict_se(model, cfg.dataset, ctx.split)
            row.update(_score(pred, ctx.test_y, c))
        elif method == "de":
            seed = derive_seed(cfg.seed, "de", ctx.fraction)
            train_fused, _ = ctx.fused()
            kg = ctx.kg()
            cnet_tr, wiki_tr = kg.rows(ctx.train_idx)
            de_cfg = _cfg_with_seed(cfg.train, seed)
            if cfg.beta is not None:
                model = train_de(
                    train_fused, ctx.train_y, cnet_tr, wiki_tr, cfg.beta, de_cfg,
                    cfg.reward_norm, hidden=cfg.hidden, classes=c,
                )
                beta = cfg.beta
            else:
                beta, model = fit_beta(
                    train_fused, ctx.train_y, cnet_tr, wiki_tr, cfg.beta_step, de_cfg,
                    cfg.reward_norm, hidden=cfg.hidden, classes=c,
                )
            pred, _ = predict_se(model, cfg.dataset, ctx.split)
            row.update(_score(pred, ctx.test_y, c))
            row["beta"] = float(beta)
        else:
            raise ValueError(f"unknown method {method!r}")
    except EnsembleKitError as exc:
        raise type(exc)(f"[method={method}, fraction={ctx.fraction}] {exc}") from exc
    return row


def _provenance(config: ExperimentConfig) -> dict:
    t = config.train
    return {
        "seed": config.seed,
        "prng": PRNG_NAME,
        "emb_format_version": EMB_VERSION,
        "net_format_version": NET_VERSION,
        "seed_derivation": "seed xor sha256(method|fraction)[:4]",
        "config": {
            "model_sources": list(config.model_sources),
            "kg_cnet": config.kg_cnet,
            "kg_wiki": config.kg_wiki,
            "methods": list(config.methods),
            "fractions": [float(f) for f in config.fractions],
            "pca_dim": config.pca_dim,
            "hidden": list(config.hidden),
            "reward_norm": config.reward_norm,
            "alpha_step": config.alpha_step,
            "beta_step": config.beta_step,
            "beta": config.beta,
            "train": {
                "batch_size": t.batch_size,
                "learning_rate": t.learning_rate,
                "weight_decay": t.weight_decay,
                "epochs": t.epochs,
                "loss_sign": t.loss_sign,
            },
        },
    }


def _fraction_rows(ctx: _FractionContext) -> list[dict]:
    return [_run_cell(ctx, m) for m in ctx.config.methods]


def run(config: ExperimentConfig) -> dict:
    """Full protocol: every configured method on every fraction, plus means."""
    contexts = [_FractionContext(config, f) for f in config.fractions]
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            per_fraction = list(pool.map(_fraction_rows, contexts))
    else:
        per_fraction = [_fraction_rows(ctx) for ctx in contexts]
    # Rows grouped by method, fractions ascending within each method.
    results = [
        rows[i] for i in range(len(config.methods)) for rows in per_fraction
    ]
    means = []
    for m in config.methods:
        rows = [r for r in results if r["method"] == m]
        means.append(
            {
                "method": m,
                "accuracy": sum(r["accuracy"] for r in rows) / len(rows),
                "kappa": sum(r["kappa"] for r in rows) / len(rows),
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "run",
        "provenance": _provenance(config),
        "results": results,
        "means": means,
    }


def ablate(config: ExperimentConfig, param: str, grid: list[float]) -> dict:
    """Mean-over-fractions test accuracy with alpha or beta frozen at each
    grid value."""
    if param not in ("alpha", "beta"):
        raise ValueError(f"unknown ablation parameter {param!r}")
    if param == "alpha" and len(config.model_sources) != 2:
        raise ValueError("alpha ablation needs exactly 2 model sources")
    if param == "beta" and (config.kg_cnet is None or config.kg_wiki is None):
        raise ValueError("beta ablation needs both knowledge-graph sources")
    contexts = [_FractionContext(config, f) for f in config.fractions]
    c = config.dataset.num_classes

    def point(value: float) -> dict:
        accs = []
        for ctx in contexts:
            if param == "alpha":
                tables = [
                    ProbabilityTable(s, ctx.baseline(s)["test_probs"])
                    for s in config.model_sources
                ]
                pred = shallow.predict(tables, SimplexWeights([value, 1.0 - value]))
            else:
                seed = derive_seed(config.seed, "de", ctx.fraction)
                train_fused, _ = ctx.fused()
                kg = ctx.kg()
                cnet_tr, wiki_tr = kg.rows(ctx.train_idx)
                model = train_de(
                    train_fused, ctx.train_y, cnet_tr, wiki_tr, value,
                    _cfg_with_seed(config.train, seed), config.reward_norm,
                    hidden=config.hidden, classes=c,
                )
                pred, _ = predict_se(model, config.dataset, ctx.split)
            accs.append(metrics.accuracy(pred, ctx.test_y))
        return {"value": float(value), "accuracy": sum(accs) / len(accs)}

    points = [point(v) for v in sorted(grid)]
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "ablation",
        "provenance": _provenance(config),
        "param": param,
        "points": points,
    }


def emit(report: dict, fmt: str, path: str | Path) -> None:
    """Write a report as full JSON or flat, plottable CSV."""
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    elif fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            if report.get("kind") == "ablation":
                w.writerow(["param_value", "accuracy"])
                for p in report["points"]:
                    w.writerow([p["value"], p["accuracy"]])
            else:
                w.writerow(["method", "fraction", "accuracy", "kappa"])
                for r in report["results"]:
                    w.writerow([r["method"], r["fraction"], r["accuracy"], r["kappa"]])
                for m in report["means"]:
                    w.writerow([m["method"], "mean", m["accuracy"], m["kappa"]])
    else:
        raise ValueError(f"unknown format {fmt!r}")
