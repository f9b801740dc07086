"""Multi-seed benchmark pipelines and table-style reporting.

Two pipelines are compared on the same data:

``hdc_base``   random bipolar item memory, record-based encoding with
               bipolarization, one-shot accumulation, then error-driven
               retraining; cosine inference.
``nn_derive``  train the two-layer dense network, extract its weights
               into hypervector memories, verify exact prediction
               equivalence, and evaluate the derived model; tanh
               encoding and dot-product inference.

Each seed is an independent run; reports aggregate per-seed test
accuracy as mean and sample standard deviation. Published LeHDC numbers
are included in tables as labeled reference values only; that framework
is not executed or reproduced here.
"""

from __future__ import annotations

import csv
import io
import json
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .classifier import HdcClassifier
from .container import file_sha256
from .datasets import SplitData, holdout_tail, load_cifar10, load_mnist, take_head
from .encoding import RecordEncoder, RgbRecordEncoder, encode_dataset
from .memory import save_memories
from .network import DenseNetClassifier, save_checkpoint
from .transplant import derive, save_derived, verify_equivalence

# published reference accuracies (percent); never executed here
LEHDC_REFERENCE = {"mnist": (94.74, 0.18), "cifar10": (46.10, 0.20)}
LEHDC_LABEL = "reference (not reproduced)"

DATASETS = ("mnist", "cifar10")
PIPELINES = ("hdc_base", "nn_derive")

__all__ = [
    "ExperimentConfig",
    "SeedRun",
    "ExperimentReport",
    "run_hdc_base",
    "run_nn_derive",
    "run_experiment",
    "evaluate_pipeline",
    "format_table",
    "write_csv",
    "write_report_json",
    "LEHDC_REFERENCE",
]


@dataclass
class ExperimentConfig:
    """Fully resolved settings for one multi-seed experiment."""

    dataset: str = "mnist"
    pipeline: str = "hdc_base"
    dims: int = 10_000
    seeds: tuple[int, ...] = (0, 1, 2)
    data_dir: str = "data"
    out_dir: str | None = None
    # encoder / inference (None = pipeline default)
    similarity: str | None = None
    activation: str | None = None
    # hdc_base retraining
    retrain_epochs: int = 20
    retrain_patience: int = 5
    # nn_derive training
    lr: float = 0.001
    batch_size: int = 64
    max_epochs: int = 50
    patience: int = 5
    min_delta_pp: float = 0.1
    n_validation: int = 5_000
    # data handling
    max_train_samples: int | None = None
    check_counts: bool = True
    expected_counts: tuple[int, int] | None = None  # None + check_counts = standard sizes
    verbose: int = 0

    def resolved(self) -> "ExperimentConfig":
        """Fill pipeline-dependent defaults and validate."""
        if self.dataset not in DATASETS:
            raise ValueError(f"unknown dataset {self.dataset!r}; expected one of {DATASETS}")
        if self.pipeline not in PIPELINES:
            raise ValueError(f"unknown pipeline {self.pipeline!r}; expected one of {PIPELINES}")
        if self.dims < 1:
            raise ValueError(f"dims must be >= 1, got {self.dims}")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        cfg = ExperimentConfig(**asdict(self))
        cfg.seeds = tuple(int(s) for s in self.seeds)
        if cfg.similarity is None:
            cfg.similarity = "cosine" if cfg.pipeline == "hdc_base" else "dot"
        if cfg.activation is None:
            cfg.activation = "bipolarize" if cfg.pipeline == "hdc_base" else "tanh"
        return cfg


@dataclass
class SeedRun:
    """Outcome of one seed: accuracy plus phase timings and artifacts."""

    seed: int
    accuracy: float  # fraction in [0, 1]
    phase_seconds: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    """Per-seed accuracies with mean and sample standard deviation."""

    config: dict
    runs: list[SeedRun]

    @property
    def dataset(self) -> str:
        return self.config["dataset"]

    @property
    def pipeline(self) -> str:
        return self.config["pipeline"]

    @property
    def n(self) -> int:
        return len(self.runs)

    @property
    def accuracies_pct(self) -> list[float]:
        return [run.accuracy * 100.0 for run in self.runs]

    @property
    def mean_pct(self) -> float:
        return float(np.mean(self.accuracies_pct))

    @property
    def std_pct(self) -> float:
        if self.n < 2:
            return 0.0
        return float(np.std(self.accuracies_pct, ddof=1))


class _Stopwatch:
    def __init__(self) -> None:
        self.phases: dict[str, float] = {}

    def time(self, name: str):
        return _Phase(self, name)


class _Phase:
    def __init__(self, watch: _Stopwatch, name: str) -> None:
        self.watch = watch
        self.name = name

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.watch.phases[self.name] = self.watch.phases.get(self.name, 0.0) + (
            time.perf_counter() - self.start
        )
        return False


def load_dataset(cfg: ExperimentConfig) -> tuple[SplitData, SplitData]:
    expected = None
    if cfg.check_counts:
        if cfg.expected_counts is not None:
            expected = tuple(cfg.expected_counts)
        else:
            expected = (60_000, 10_000) if cfg.dataset == "mnist" else (50_000, 10_000)
    loader = load_mnist if cfg.dataset == "mnist" else load_cifar10
    train, test = loader(cfg.data_dir, expected_counts=expected)
    train = take_head(train, cfg.max_train_samples)
    return train, test


def _build_encoder(cfg: ExperimentConfig, layout: str, seed: int):
    if layout == "rgb_planes":
        return RgbRecordEncoder(dims=cfg.dims, dist="bipolar", activation=cfg.activation, seed=seed)
    return RecordEncoder(dims=cfg.dims, dist="bipolar", activation=cfg.activation, seed=seed)


def evaluate_pipeline(encoder, classifier, X, y, chunk_size: int = 4096) -> float:
    """Accuracy of encode-then-classify over ``(X, y)``, in chunks.

    The single evaluation path shared by canonical and derived models.
    """
    X = np.asarray(X)
    y = np.asarray(y)
    if X.shape[0] == 0:
        warnings.warn("evaluate_pipeline() called with an empty sample set; returning 0.0")
        return 0.0
    n_correct = 0
    for start in range(0, X.shape[0], chunk_size):
        chunk = X[start : start + chunk_size]
        preds = classifier.predict(encoder.transform(chunk))
        n_correct += int(np.count_nonzero(preds == y[start : start + chunk_size]))
    return n_correct / X.shape[0]


def _seed_dir(cfg: ExperimentConfig, seed: int) -> Path | None:
    if cfg.out_dir is None:
        return None
    path = Path(cfg.out_dir) / f"{cfg.pipeline}_{cfg.dataset}_seed{seed}"
    path.mkdir(parents=True, exist_ok=True)
    return path


class SeedRunError(RuntimeError):
    """A per-seed pipeline failure; the message names the seed."""


def _seed_context(seed: int, exc: Exception) -> SeedRunError:
    return SeedRunError(f"seed {seed}: {exc}")


def run_hdc_base(cfg: ExperimentConfig) -> ExperimentReport:
    """Canonical pipeline: encode, accumulate, retrain, evaluate.

    Any per-seed failure aborts the whole run with a seed-tagged error.
    """
    cfg = cfg.resolved()
    train, test = load_dataset(cfg)
    runs = []
    for seed in cfg.seeds:
        try:
            runs.append(_run_hdc_base_seed(cfg, train, test, seed))
        except SeedRunError:
            raise
        except Exception as exc:
            raise _seed_context(seed, exc) from exc
        if cfg.verbose:
            print(f"[hdc_base {cfg.dataset} seed {seed}] accuracy {runs[-1].accuracy:.4f}")
    return ExperimentReport(config=asdict(cfg), runs=runs)


def _run_hdc_base_seed(cfg: ExperimentConfig, train, test, seed: int) -> SeedRun:
    watch = _Stopwatch()
    encoder = _build_encoder(cfg, train.layout, seed)
    with watch.time("encode"):
        encoder.fit(train.X)
        train_hv = encode_dataset(encoder, train.X)
    clf = HdcClassifier(
        n_classes=10,
        similarity=cfg.similarity,
        retrain_epochs=0,
        patience=cfg.retrain_patience,
        seed=seed,
    )
    with watch.time("train"):
        clf.fit(train_hv, train.y)
    history = None
    if cfg.retrain_epochs > 0:
        with watch.time("retrain"):
            history = clf.retrain(
                train_hv, train.y, max_epochs=cfg.retrain_epochs, patience=cfg.retrain_patience
            )
    del train_hv
    with watch.time("evaluate"):
        accuracy = evaluate_pipeline(encoder, clf, test.X, test.y)
    artifacts = {}
    seed_dir = _seed_dir(cfg, seed)
    if seed_dir is not None:
        memories_path = seed_dir / "memories.hvc"
        save_memories(
            encoder.item_memories(),
            clf.am_,
            memories_path,
            meta={
                "source": "canonical",
                "dataset": cfg.dataset,
                "layout": train.layout,
                "activation": cfg.activation,
                "similarity": cfg.similarity,
                "seed": seed,
            },
        )
        artifacts["memories"] = str(memories_path)
        artifacts["memories_sha256"] = file_sha256(memories_path)
    return SeedRun(
        seed=seed,
        accuracy=accuracy,
        phase_seconds=watch.phases,
        artifacts=artifacts,
        extra={"retrain_history": history},
    )


def run_nn_derive(cfg: ExperimentConfig) -> ExperimentReport:
    """Network-derived pipeline: train, extract, verify equivalence, evaluate.

    A nonzero mismatch count between the derived model and the source
    network is an invariant breach and aborts the run; so does any other
    per-seed failure, tagged with its seed.
    """
    cfg = cfg.resolved()
    train, test = load_dataset(cfg)
    runs = []
    for seed in cfg.seeds:
        try:
            runs.append(_run_nn_derive_seed(cfg, train, test, seed))
        except SeedRunError:
            raise
        except Exception as exc:
            raise _seed_context(seed, exc) from exc
        if cfg.verbose:
            print(f"[nn_derive {cfg.dataset} seed {seed}] accuracy {runs[-1].accuracy:.4f}")
    return ExperimentReport(config=asdict(cfg), runs=runs)


def _run_nn_derive_seed(cfg: ExperimentConfig, train, test, seed: int) -> SeedRun:
    watch = _Stopwatch()
    fit_train, fit_val = holdout_tail(train, min(cfg.n_validation, max(1, len(train) // 5)))
    net_clf = DenseNetClassifier(
        hidden_dims=cfg.dims,
        n_classes=10,
        lr=cfg.lr,
        batch_size=cfg.batch_size,
        max_epochs=cfg.max_epochs,
        patience=cfg.patience,
        min_delta_pp=cfg.min_delta_pp,
        seed=seed,
        verbose=cfg.verbose,
    )
    with watch.time("nn_train"):
        net_clf.fit(fit_train.X, fit_train.y, fit_val.X, fit_val.y)
    with watch.time("derive"):
        model = derive(net_clf.net_, similarity=cfg.similarity, activation=cfg.activation)
    with watch.time("verify"):
        report = verify_equivalence(net_clf.net_, model, test.X)
    if cfg.similarity == "dot" and cfg.activation == "tanh" and not report.equivalent:
        raise SeedRunError(
            f"seed {seed}: derived model disagrees with the source network on "
            f"{report.n_mismatches}/{report.n_samples} test samples"
        )
    with watch.time("evaluate"):
        accuracy = evaluate_pipeline(model.encoder, model.classifier, test.X, test.y)
    artifacts = {}
    seed_dir = _seed_dir(cfg, seed)
    if seed_dir is not None:
        ckpt_path = seed_dir / "network.hvc"
        save_checkpoint(
            net_clf.net_,
            ckpt_path,
            meta={
                "dataset": cfg.dataset,
                "seed": seed,
                "train_config": net_clf.get_params(),
                "history": net_clf.history_,
            },
        )
        memories_path = seed_dir / "memories.hvc"
        save_derived(model, memories_path, meta={"dataset": cfg.dataset, "seed": seed})
        artifacts["checkpoint"] = str(ckpt_path)
        artifacts["checkpoint_sha256"] = file_sha256(ckpt_path)
        artifacts["memories"] = str(memories_path)
        artifacts["memories_sha256"] = file_sha256(memories_path)
    return SeedRun(
        seed=seed,
        accuracy=accuracy,
        phase_seconds=watch.phases,
        artifacts=artifacts,
        extra={
            "equivalence_mismatches": report.n_mismatches,
            "best_val_accuracy": net_clf.history_["best_val_accuracy"],
            "epochs_run": len(net_clf.history_["val_accuracy"]),
            "source_hash": model.source_hash,
        },
    )


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    cfg = cfg.resolved()
    runner = run_hdc_base if cfg.pipeline == "hdc_base" else run_nn_derive
    return runner(cfg)


def _fmt_pm(mean: float, std: float) -> str:
    return f"{mean:.2f}^{{±{std:.2f}}}"


def format_table(reports: list[ExperimentReport]) -> str:
    """Render reports as an aligned text table with the reference column."""
    if not reports:
        raise ValueError("no reports to format")
    header = ("dataset", "pipeline", "dims", "n", "accuracy", f"LeHDC {LEHDC_LABEL}")
    rows = [header]
    for rep in reports:
        ref_mean, ref_std = LEHDC_REFERENCE[rep.dataset]
        acc = _fmt_pm(rep.mean_pct, rep.std_pct)
        if rep.n == 1:
            acc += " (n=1)"
        rows.append(
            (
                rep.dataset,
                rep.pipeline,
                str(rep.config["dims"]),
                str(rep.n),
                acc,
                _fmt_pm(ref_mean, ref_std),
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_csv(reports: list[ExperimentReport], path: str | Path | None = None) -> str:
    """Machine-readable per-seed rows; floats round-trip exactly."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["dataset", "pipeline", "dims", "n", "seed", "accuracy_pct", "mean_pct", "std_pct"]
    )
    for rep in reports:
        for run in rep.runs:
            writer.writerow(
                [
                    rep.dataset,
                    rep.pipeline,
                    rep.config["dims"],
                    rep.n,
                    run.seed,
                    format(run.accuracy * 100.0, ".17g"),
                    format(rep.mean_pct, ".17g"),
                    format(rep.std_pct, ".17g"),
                ]
            )
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def write_report_json(reports: list[ExperimentReport], path: str | Path) -> None:
    """Self-contained JSON: config, per-seed results, aggregates, references."""
    payload = []
    for rep in reports:
        payload.append(
            {
                "config": rep.config,
                "runs": [asdict(run) for run in rep.runs],
                "n": rep.n,
                "accuracies_pct": rep.accuracies_pct,
                "mean_pct": rep.mean_pct,
                "std_pct": rep.std_pct,
                "std_kind": "sample standard deviation over seeds (ddof=1)",
                "lehdc_reference_pct": {
                    "mean": LEHDC_REFERENCE[rep.dataset][0],
                    "std": LEHDC_REFERENCE[rep.dataset][1],
                    "label": LEHDC_LABEL,
                },
            }
        )
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))
