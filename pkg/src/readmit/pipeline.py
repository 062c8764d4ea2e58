"""Run configuration and the staged pipeline.

Each stage writes into its own subdirectory of the output root together
with a manifest (full config, its hash, seed, versions; never wall-clock
state), so a rerun with the same config and seed reproduces the output tree
byte for byte, and running stages individually equals one ``run_all``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from . import __version__
from .claims import (
    parse_demographics, parse_medical_claims, parse_pharmacy_claims,
    write_demographics, write_medical_claims, write_pharmacy_claims,
)
from .codes import load_code_mappings
from .dataset import (
    SplitSpec, one_hot_encode, stratified_kfold, train_test_split,
    write_matrix_csv,
)
from .episodes import build_labeled_admissions, write_admissions_csv
from .errors import ConfigError, ReadmitError
from .features import extract_features, read_features_csv, write_features_csv
from .models import (
    ModelBundle, expand_grid, fit_linear_svm, fit_logistic, fit_pca,
    fit_random_forest, grid_search, loglik_feature_select, pca_transform,
    rf_fold_auc, save_bundle, svm_fold_auc, write_grid_csv,
)
from .models.persist import BUNDLE_KINDS, load_bundle
from .evaluation import build_report, write_report_csv, write_roc_csv
from .seeding import FOREST_STREAM, derive_seed
from .synth import GeneratorConfig, SignalSpec, generate

SCHEMA_VERSION = 1

DEFAULT_RF_GRID = {
    "ntree": [500, 1000, 150],   # deliberately 150, not 1500; see README
    "mtry": [20, 30, 40, 50],
    "nodesize": [1, 3, 7, 9],
    "maxnodes": [200, 300],
}
DEFAULT_SVM_C_GRID = [0.001, 0.01, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0]

DEFAULT_GENERATOR = {
    "n_users": 5000,
    "start_date": "2015-01-01",
    "end_date": "2019-12-31",
    "mean_admissions_per_user": 2.0,
    "readmission_fraction": 0.0465,
    "noise_claim_rate": 0.3,
    "hospital_visit_rate": 0.15,
    "signals": [],
}


@dataclass
class RunConfig:
    seed: int = 0
    strict: bool = True
    threshold: float = 0.5
    jobs: int = 1
    # input paths; unset paths fall back to the generated data locations
    medical: str | None = None
    pharmacy: str | None = None
    demographics: str | None = None
    comorbidity_map: str | None = None
    ccs_map: str | None = None
    # split
    train_fraction: float = 0.8
    fold_count: int = 10
    user_level_split: bool = False
    # model knobs
    lr_l2: float = 1e-4
    lr_tol: float = 1e-6
    lr_max_iter: int = 500
    selection_significance: float = 0.05
    select_after_pca: bool = False
    pca_variance_target: float = 0.95
    svm_epochs: int = 5
    rf_grid: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_RF_GRID.items()})
    svm_c_grid: list = field(default_factory=lambda: list(DEFAULT_SVM_C_GRID))
    generator: dict = field(default_factory=lambda: json.loads(json.dumps(DEFAULT_GENERATOR)))

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        for key, value in raw.items():
            if key == "generator":
                merged = dict(DEFAULT_GENERATOR)
                extra = set(value) - set(merged) - {"seed"}
                if extra:
                    raise ConfigError(f"unknown generator keys: {sorted(extra)}")
                merged.update(value)
                merged.pop("seed", None)
                setattr(cfg, key, merged)
            else:
                setattr(cfg, key, value)
        return cfg

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def canonical_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def generator_config(self) -> GeneratorConfig:
        g = self.generator
        signals = tuple(
            SignalSpec(
                kind=s["kind"], value=str(s["value"]),
                strength=float(s["strength"]),
                carrier_rate=float(s.get("carrier_rate", 0.5)),
            )
            for s in g.get("signals", [])
        )
        return GeneratorConfig(
            n_users=int(g["n_users"]),
            start_date=date.fromisoformat(g["start_date"]),
            end_date=date.fromisoformat(g["end_date"]),
            mean_admissions_per_user=float(g["mean_admissions_per_user"]),
            readmission_fraction=float(g["readmission_fraction"]),
            signals=signals,
            noise_claim_rate=float(g["noise_claim_rate"]),
            hospital_visit_rate=float(g["hospital_visit_rate"]),
            seed=self.seed,
        )

    def split_spec(self) -> SplitSpec:
        return SplitSpec(
            seed=self.seed,
            train_fraction=self.train_fraction,
            fold_count=self.fold_count,
            user_level=self.user_level_split,
        )


def _log(stage: str, **info):
    detail = " ".join(f"{k}={v}" for k, v in info.items())
    print(f"stage={stage} {detail}".rstrip(), file=sys.stderr)


def _write_manifest(cfg: RunConfig, stage: str, out_dir: Path):
    manifest = {
        "stage": stage,
        "config": json.loads(cfg.canonical_json()),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "package_version": __version__,
        "schema_version": SCHEMA_VERSION,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise FileNotFoundError(f"missing {what}: {path}")
    return path


def _resolve_inputs(cfg: RunConfig, out_root: Path):
    data_dir = out_root / "data"
    return (
        Path(cfg.medical) if cfg.medical else data_dir / "medical_claims.csv",
        Path(cfg.pharmacy) if cfg.pharmacy else data_dir / "pharmacy_claims.csv",
        Path(cfg.demographics) if cfg.demographics else data_dir / "demographics.csv",
    )


def _load_mappings(cfg: RunConfig):
    return load_code_mappings(cfg.comorbidity_map, cfg.ccs_map)


def _parse_all(cfg: RunConfig, out_root: Path):
    medical_path, pharmacy_path, demo_path = _resolve_inputs(cfg, out_root)
    medical = parse_medical_claims(_require(medical_path, "medical claims file"), cfg.strict)
    pharmacy = parse_pharmacy_claims(_require(pharmacy_path, "pharmacy claims file"), cfg.strict)
    demographics = parse_demographics(_require(demo_path, "demographics file"), cfg.strict)
    for name, result in (("medical", medical), ("pharmacy", pharmacy), ("demographics", demographics)):
        if result.errors:
            _log("parse", file=name, skipped=len(result.errors))
    return medical.records, pharmacy.records, demographics.records


def stage_generate(cfg: RunConfig, out_root: Path) -> Path:
    out_dir = out_root / "data"
    out_dir.mkdir(parents=True, exist_ok=True)
    data = generate(cfg.generator_config())
    write_medical_claims(data.medical, out_dir / "medical_claims.csv")
    write_pharmacy_claims(data.pharmacy, out_dir / "pharmacy_claims.csv")
    write_demographics(data.demographics, out_dir / "demographics.csv")
    _write_manifest(cfg, "generate", out_dir)
    _log("generate", users=len(data.demographics), medical_claims=len(data.medical),
         admissions=len(data.planted))
    return out_dir


def stage_episodes(cfg: RunConfig, out_root: Path) -> Path:
    out_dir = out_root / "episodes"
    out_dir.mkdir(parents=True, exist_ok=True)
    medical_path, _, _ = _resolve_inputs(cfg, out_root)
    result = parse_medical_claims(_require(medical_path, "medical claims file"), cfg.strict)
    if result.errors:
        _log("parse", file="medical", skipped=len(result.errors))
    labeled, removed = build_labeled_admissions(result.records, _load_mappings(cfg))
    write_admissions_csv(labeled, out_dir / "admissions.csv")
    _write_manifest(cfg, "episodes", out_dir)
    _log("episodes", admissions=len(labeled), readmissions=len(removed))
    return out_dir


def stage_features(cfg: RunConfig, out_root: Path) -> Path:
    out_dir = out_root / "features"
    out_dir.mkdir(parents=True, exist_ok=True)
    medical, pharmacy, demographics = _parse_all(cfg, out_root)
    mappings = _load_mappings(cfg)
    labeled, _ = build_labeled_admissions(medical, mappings)
    features = extract_features(labeled, medical, pharmacy, demographics, mappings)
    write_features_csv(features, out_dir / "features.csv")
    _write_manifest(cfg, "features", out_dir)
    _log("features", rows=len(features))
    return out_dir


def train_models(cfg: RunConfig, matrix, train, folds):
    """Fit the six pipeline variants on the training matrix; returns
    (bundles by kind, rf grid result, svm grid result)."""
    svm_grid = {"C": list(cfg.svm_c_grid), "epochs": [cfg.svm_epochs]}
    expand_grid(cfg.rf_grid)       # validate both grids before any fitting
    expand_grid(svm_grid)

    cols = matrix.column_names
    Xtr, ytr = train.X, train.y

    bundles: dict[str, ModelBundle] = {}
    lr_all = fit_logistic(Xtr, ytr, cfg.lr_l2, cfg.lr_tol, cfg.lr_max_iter, column_names=cols)
    bundles["lr_all"] = ModelBundle(kind="lr_all", column_names=cols, lr=lr_all)

    selected_idx = loglik_feature_select(Xtr, ytr, cfg.selection_significance)
    selected_names = [cols[i] for i in selected_idx]
    lr_sel = fit_logistic(Xtr[:, selected_idx], ytr, cfg.lr_l2, cfg.lr_tol, cfg.lr_max_iter)
    bundles["lr_selected"] = ModelBundle(
        kind="lr_selected", column_names=cols,
        selected_columns=selected_names, lr=lr_sel,
    )

    pca_all = fit_pca(Xtr, cfg.pca_variance_target, column_names=cols)
    lr_pca = fit_logistic(pca_transform(pca_all, Xtr), ytr,
                          cfg.lr_l2, cfg.lr_tol, cfg.lr_max_iter)
    bundles["pca_lr"] = ModelBundle(kind="pca_lr", column_names=cols, pca=pca_all, lr=lr_pca)

    if cfg.select_after_pca:
        # Alternative reading: project first, then select components; the
        # unselected components keep zero weight so scoring stays uniform.
        Ztr = pca_transform(pca_all, Xtr)
        comp_idx = loglik_feature_select(Ztr, ytr, cfg.selection_significance)
        lr_comp = fit_logistic(Ztr[:, comp_idx], ytr, cfg.lr_l2, cfg.lr_tol, cfg.lr_max_iter)
        weights = np.zeros(Ztr.shape[1])
        weights[comp_idx] = lr_comp.weights
        lr_comp.weights = weights
        bundles["pca_lr_selected"] = ModelBundle(
            kind="pca_lr_selected", column_names=cols, pca=pca_all, lr=lr_comp,
        )
    else:
        pca_sel = fit_pca(Xtr[:, selected_idx], cfg.pca_variance_target) \
            if selected_idx else None
        if pca_sel is None:
            raise ConfigError(
                "feature selection kept no columns; cannot build the "
                "selected-features PCA model"
            )
        lr_pca_sel = fit_logistic(pca_transform(pca_sel, Xtr[:, selected_idx]), ytr,
                                  cfg.lr_l2, cfg.lr_tol, cfg.lr_max_iter)
        bundles["pca_lr_selected"] = ModelBundle(
            kind="pca_lr_selected", column_names=cols,
            selected_columns=selected_names, pca=pca_sel, lr=lr_pca_sel,
        )

    rf_result = grid_search(rf_fold_auc, cfg.rf_grid, Xtr, ytr, folds, cfg.seed, cfg.jobs)
    rf_best = fit_random_forest(
        Xtr, ytr, seed=derive_seed(cfg.seed, FOREST_STREAM),
        column_names=cols, jobs=cfg.jobs, **rf_result.winner,
    )
    bundles["rf_best"] = ModelBundle(kind="rf_best", column_names=cols, rf=rf_best)

    svm_result = grid_search(svm_fold_auc, svm_grid, Xtr, ytr, folds, cfg.seed, cfg.jobs)
    svm_best = fit_linear_svm(Xtr, ytr, seed=cfg.seed, column_names=cols, **svm_result.winner)
    bundles["svm_best"] = ModelBundle(kind="svm_best", column_names=cols, svm=svm_best)

    return bundles, rf_result, svm_result


def _build_matrix(cfg: RunConfig, features_path: Path):
    features = read_features_csv(_require(features_path, "features file"))
    if not features:
        raise ReadmitError(f"{features_path} holds no admissions")
    matrix = one_hot_encode(features, _load_mappings(cfg))
    train, test = train_test_split(matrix, cfg.split_spec())
    return matrix, train, test


def _write_split_manifest(cfg: RunConfig, train, test, dest: Path):
    manifest = {
        "seed": cfg.seed,
        "train_fraction": cfg.train_fraction,
        "user_level": cfg.user_level_split,
        "train_row_ids": [list(rid) for rid in train.row_ids],
        "test_row_ids": [list(rid) for rid in test.row_ids],
    }
    dest.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def stage_train(cfg: RunConfig, out_root: Path, features_path: Path | None = None) -> Path:
    out_dir = out_root / "models"
    out_dir.mkdir(parents=True, exist_ok=True)
    features_path = features_path or out_root / "features" / "features.csv"
    matrix, train, test = _build_matrix(cfg, features_path)
    folds = stratified_kfold(train.y, cfg.fold_count, cfg.seed)
    bundles, rf_result, svm_result = train_models(cfg, matrix, train, folds)
    for kind, bundle in bundles.items():
        save_bundle(bundle, out_dir / f"{kind}.model")
    write_grid_csv(rf_result, out_dir / "rf_grid.csv")
    write_grid_csv(svm_result, out_dir / "svm_grid.csv")
    write_matrix_csv(matrix, out_dir / "matrix.csv")
    _write_split_manifest(cfg, train, test, out_dir / "split_manifest.json")
    _write_manifest(cfg, "train", out_dir)
    _log("train", rf_configs=len(rf_result.configs), svm_configs=len(svm_result.configs),
         rf_winner=rf_result.winner, selected=len(bundles["lr_selected"].selected_columns or []))
    return out_dir


def stage_evaluate(
    cfg: RunConfig,
    out_root: Path,
    features_path: Path | None = None,
    models_dir: Path | None = None,
) -> Path:
    out_dir = out_root / "eval"
    out_dir.mkdir(parents=True, exist_ok=True)
    features_path = features_path or out_root / "features" / "features.csv"
    models_dir = models_dir or out_root / "models"
    _require(models_dir, "models directory")
    matrix, train, test = _build_matrix(cfg, features_path)
    bundles = {
        kind: load_bundle(_require(models_dir / f"{kind}.model", f"{kind} model"))
        for kind in BUNDLE_KINDS
    }
    report = build_report(bundles, train, test, cfg.threshold)
    for row in report.rows:
        write_roc_csv(row.train_roc, out_dir / f"roc_{row.name}_train.csv")
        write_roc_csv(row.test_roc, out_dir / f"roc_{row.name}_test.csv")
    write_report_csv(report, out_dir / "report.csv")
    _write_manifest(cfg, "evaluate", out_dir)
    _log("evaluate", models=len(report.rows), threshold=cfg.threshold)
    return out_dir


def run_all(cfg: RunConfig, out_root: Path) -> Path:
    out_root = Path(out_root)
    needs_generate = not (cfg.medical and cfg.pharmacy and cfg.demographics)
    if needs_generate:
        stage_generate(cfg, out_root)
    stage_episodes(cfg, out_root)
    stage_features(cfg, out_root)
    stage_train(cfg, out_root)
    stage_evaluate(cfg, out_root)
    return out_root
