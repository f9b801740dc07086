"""Command line interface.

Subcommands cover the full model lifecycle::

    encode    build (and save) item memories for a dataset
    train     one-shot accumulation into an associative memory
    retrain   error-driven fine-tuning of saved memories
    nn-train  train the two-layer dense network
    derive    extract an HDC model from a network checkpoint
    eval      evaluate a memories file on a dataset split
    bench     multi-seed pipeline comparison with table/CSV/JSON reports

Every run writes its fully resolved configuration as JSON next to its
outputs. A ``--config`` file holds ``key=value`` lines (``#`` comments
allowed); command-line flags override file values.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import bench
from .classifier import HdcClassifier
from .container import file_sha256
from .datasets import holdout_tail, load_cifar10, load_mnist, take_head
from .encoding import RecordEncoder, RgbRecordEncoder, encode_dataset
from .memory import load_memories, save_memories
from .network import DenseNetClassifier, load_checkpoint, save_checkpoint
from .transplant import derive_from_checkpoint, save_derived


def _parse_config_file(path: str) -> dict:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(value: str, like) -> object:
    if isinstance(like, bool):
        return value.lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


def _seed_list(text: str) -> tuple[int, ...]:
    return tuple(int(s) for s in text.replace(",", " ").split())


def _counts(text: str):
    if text.lower() == "any":
        return None
    parts = [int(p) for p in text.replace(",", " ").split()]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected 'any' or two integers: TRAIN,TEST")
    return tuple(parts)


def _load_dataset(args):
    loader = load_mnist if args.dataset == "mnist" else load_cifar10
    return loader(args.data_dir, expected_counts=args.expected_counts)


def _default_counts(dataset: str):
    return (60_000, 10_000) if dataset == "mnist" else (50_000, 10_000)


def _build_encoder(args, layout: str, seed: int):
    cls = RgbRecordEncoder if layout == "rgb_planes" else RecordEncoder
    return cls(dims=args.dims, dist="bipolar", activation=args.activation, seed=seed)


def _write_resolved_config(args, out_dir: Path, name: str = "resolved_config.json") -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    (out_dir / name).write_text(json.dumps(resolved, indent=2, sort_keys=True, default=str))


def _encoder_from_memories(path: str):
    """Rebuild the encoder+classifier recorded in a memories file."""
    ims, am, meta = load_memories(path)
    activation = meta.get("activation", "bipolarize")
    similarity = meta.get("similarity", "cosine")
    if len(ims) == 3:
        encoder = RgbRecordEncoder(
            dims=ims[0].dims, activation=activation, item_memory_rgb=ims, seed=meta.get("seed", 0)
        )
        encoder.fit(np.empty((0, 3 * ims[0].num_items), dtype=np.float32))
    elif len(ims) == 1:
        encoder = RecordEncoder(
            dims=ims[0].dims, activation=activation, item_memory=ims[0], seed=meta.get("seed", 0)
        )
        encoder.fit(np.empty((0, ims[0].num_items), dtype=np.float32))
    else:
        raise ValueError(f"{path}: expected 1 or 3 item memories, found {len(ims)}")
    classifier = HdcClassifier.from_memories(am, similarity=similarity)
    return encoder, classifier, meta


# ----------------------------------------------------------------------
# subcommand implementations
# ----------------------------------------------------------------------


def _cmd_encode(args) -> int:
    train, test = _load_dataset(args)
    encoder = _build_encoder(args, train.layout, args.seed)
    encoder.fit(train.X)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .memory import zero_associative_memory

    memories_path = out_dir / "memories.hvc"
    save_memories(
        encoder.item_memories(),
        zero_associative_memory(10, args.dims),
        memories_path,
        meta={
            "source": "canonical",
            "dataset": args.dataset,
            "layout": train.layout,
            "activation": args.activation,
            "similarity": args.similarity,
            "seed": args.seed,
        },
    )
    if args.save_hvs:
        for name, split in (("train", train), ("test", test)):
            hv = encode_dataset(encoder, split.X)
            np.save(out_dir / f"{name}_hv.npy", hv)
    _write_resolved_config(args, out_dir)
    print(f"wrote {memories_path} (sha256 {file_sha256(memories_path)[:12]})")
    return 0


def _cmd_train(args) -> int:
    train, _ = _load_dataset(args)
    train = take_head(train, args.max_train_samples)
    encoder = _build_encoder(args, train.layout, args.seed)
    encoder.fit(train.X)
    clf = HdcClassifier(n_classes=10, similarity=args.similarity, retrain_epochs=0, seed=args.seed)
    from .memory import zero_associative_memory

    clf.am_ = zero_associative_memory(10, encoder.dims_)
    clf.classes_ = np.arange(10)
    clf.n_features_in_ = encoder.dims_
    # accumulation is additive, so chunked streaming gives the same rows
    chunk = 4096
    for i in range(0, len(train), chunk):
        clf.train_once(encoder.transform(train.X[i : i + chunk]), train.y[i : i + chunk])
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    memories_path = out_dir / "memories.hvc"
    save_memories(
        encoder.item_memories(),
        clf.am_,
        memories_path,
        meta={
            "source": "canonical",
            "dataset": args.dataset,
            "layout": train.layout,
            "activation": args.activation,
            "similarity": args.similarity,
            "seed": args.seed,
        },
    )
    _write_resolved_config(args, out_dir)
    print(f"wrote {memories_path} (sha256 {file_sha256(memories_path)[:12]})")
    return 0


def _cmd_retrain(args) -> int:
    encoder, clf, meta = _encoder_from_memories(args.memories)
    train, _ = _load_dataset(args)
    train = take_head(train, args.max_train_samples)
    clf.seed = args.seed
    train_hv = encode_dataset(encoder, train.X)
    history = clf.retrain(train_hv, train.y, max_epochs=args.retrain_epochs, patience=args.retrain_patience)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    memories_path = out_dir / "memories.hvc"
    meta = dict(meta)
    meta["retrained_epochs"] = len(history["epoch_accuracy"])
    save_memories(encoder.item_memories(), clf.am_, memories_path, meta=meta)
    _write_resolved_config(args, out_dir)
    print(
        f"retrained {len(history['epoch_accuracy'])} epochs, "
        f"best train accuracy {history['best_accuracy']:.4f}"
    )
    print(f"wrote {memories_path} (sha256 {file_sha256(memories_path)[:12]})")
    return 0


def _cmd_nn_train(args) -> int:
    train, _ = _load_dataset(args)
    train = take_head(train, args.max_train_samples)
    fit_train, fit_val = holdout_tail(train, min(args.n_validation, max(1, len(train) // 5)))
    clf = DenseNetClassifier(
        hidden_dims=args.dims,
        n_classes=10,
        lr=args.lr,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        min_delta_pp=args.min_delta_pp,
        seed=args.seed,
        verbose=args.verbose,
    )
    start = time.perf_counter()
    clf.fit(fit_train.X, fit_train.y, fit_val.X, fit_val.y)
    elapsed = time.perf_counter() - start
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt = out_dir / "network.hvc"
    save_checkpoint(
        clf.net_,
        ckpt,
        meta={
            "dataset": args.dataset,
            "seed": args.seed,
            "train_config": clf.get_params(),
            "history": clf.history_,
        },
    )
    _write_resolved_config(args, out_dir)
    print(
        f"trained {len(clf.history_['val_accuracy'])} epochs in {elapsed:.1f}s, "
        f"best val accuracy {clf.history_['best_val_accuracy']:.4f}"
    )
    print(f"wrote {ckpt} (sha256 {file_sha256(ckpt)[:12]})")
    return 0


def _cmd_derive(args) -> int:
    activation = "bipolarize" if args.bipolarize else "tanh"
    model, meta = derive_from_checkpoint(
        args.checkpoint, similarity=args.similarity, activation=activation
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    memories_path = out_dir / "memories.hvc"
    save_derived(model, memories_path, meta={"dataset": meta.get("dataset"), "seed": meta.get("seed")})
    _write_resolved_config(args, out_dir)
    print(
        f"derived item memory {model.item_memory.num_items}x{model.item_memory.dims}, "
        f"associative memory {model.associative_memory.num_classes}x{model.associative_memory.dims}"
    )
    print(f"wrote {memories_path} (source hash {model.source_hash[:12]})")
    return 0


def _cmd_eval(args) -> int:
    encoder, clf, meta = _encoder_from_memories(args.memories)
    if args.similarity is not None:
        clf.similarity = args.similarity
    train, test = _load_dataset(args)
    split = test if args.split == "test" else train
    accuracy = bench.evaluate_pipeline(encoder, clf, split.X, split.y)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "memories": str(args.memories),
        "memories_sha256": file_sha256(args.memories),
        "dataset": args.dataset,
        "split": args.split,
        "n_samples": len(split),
        "accuracy": accuracy,
        "similarity": clf.similarity,
        "activation": encoder.activation,
        "source": meta.get("source"),
    }
    (out_dir / "eval_report.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    _write_resolved_config(args, out_dir)
    print(f"accuracy {accuracy:.4f} on {args.dataset} {args.split} ({len(split)} samples)")
    return 0


def _cmd_bench(args) -> int:
    cfg = bench.ExperimentConfig(
        dataset=args.dataset,
        pipeline=args.pipeline,
        dims=args.dims,
        seeds=args.seeds,
        data_dir=args.data_dir,
        out_dir=args.out_dir,
        similarity=args.similarity,
        activation="bipolarize" if args.bipolarize and args.pipeline == "nn_derive" else args.activation,
        retrain_epochs=args.retrain_epochs,
        retrain_patience=args.retrain_patience,
        lr=args.lr,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        min_delta_pp=args.min_delta_pp,
        n_validation=args.n_validation,
        max_train_samples=args.max_train_samples,
        check_counts=args.expected_counts is not None,
        expected_counts=args.expected_counts,
        verbose=args.verbose,
    ).resolved()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "resolved_config.json").write_text(json.dumps(asdict(cfg), indent=2, sort_keys=True))
    report = bench.run_experiment(cfg)
    table = bench.format_table([report])
    print(table, end="")
    (out_dir / "table.txt").write_text(table)
    bench.write_csv([report], out_dir / "report.csv")
    bench.write_report_json([report], out_dir / "report.json")
    return 0


# ----------------------------------------------------------------------
# parser wiring
# ----------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--dataset", choices=("mnist", "cifar10"), default="mnist")
    parser.add_argument("--data-dir", default="data", help="directory with the dataset files")
    parser.add_argument("--out-dir", default="runs/latest", help="directory for outputs")
    parser.add_argument("--dims", type=int, default=10_000, help="hypervector dimensionality")
    parser.add_argument(
        "--expected-counts",
        type=_counts,
        default="default",
        help="expected TRAIN,TEST sample counts, or 'any' to accept other sizes",
    )
    parser.add_argument("--max-train-samples", type=int, default=None)
    parser.add_argument("--deterministic", action="store_true", help="pin BLAS to one thread")
    parser.add_argument("--verbose", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hvlearn", description="hyperdimensional computing toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_encode = sub.add_parser("encode", help="build item memories for a dataset")
    _add_common(p_encode)
    p_encode.add_argument("--seed", type=int, default=0)
    p_encode.add_argument("--activation", choices=("bipolarize", "tanh", "none"), default="bipolarize")
    p_encode.add_argument("--similarity", choices=("cosine", "dot"), default="cosine")
    p_encode.add_argument("--save-hvs", action="store_true", help="also save encoded splits as .npy")
    p_encode.set_defaults(func=_cmd_encode)

    p_train = sub.add_parser("train", help="one-shot associative memory accumulation")
    _add_common(p_train)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--activation", choices=("bipolarize", "tanh", "none"), default="bipolarize")
    p_train.add_argument("--similarity", choices=("cosine", "dot"), default="cosine")
    p_train.set_defaults(func=_cmd_train)

    p_retrain = sub.add_parser("retrain", help="error-driven fine-tuning of saved memories")
    _add_common(p_retrain)
    p_retrain.add_argument("--memories", required=True, help="memories file from train/derive")
    p_retrain.add_argument("--seed", type=int, default=0)
    p_retrain.add_argument("--retrain-epochs", type=int, default=20)
    p_retrain.add_argument("--retrain-patience", type=int, default=5)
    p_retrain.set_defaults(func=_cmd_retrain)

    p_nn = sub.add_parser("nn-train", help="train the two-layer dense network")
    _add_common(p_nn)
    p_nn.add_argument("--seed", type=int, default=0)
    p_nn.add_argument("--lr", type=float, default=0.001)
    p_nn.add_argument("--batch-size", type=int, default=64)
    p_nn.add_argument("--max-epochs", type=int, default=50)
    p_nn.add_argument("--patience", type=int, default=5)
    p_nn.add_argument("--min-delta-pp", type=float, default=0.1)
    p_nn.add_argument("--n-validation", type=int, default=5_000)
    p_nn.set_defaults(func=_cmd_nn_train)

    p_derive = sub.add_parser("derive", help="extract an HDC model from a checkpoint")
    p_derive.add_argument("--config", help="key=value config file; flags override it")
    p_derive.add_argument("--checkpoint", required=True)
    p_derive.add_argument("--out-dir", default="runs/latest")
    p_derive.add_argument("--similarity", choices=("cosine", "dot"), default="dot")
    p_derive.add_argument(
        "--bipolarize",
        action="store_true",
        help="ablation: hard sign thresholding instead of tanh after encoding",
    )
    p_derive.set_defaults(func=_cmd_derive)

    p_eval = sub.add_parser("eval", help="evaluate a memories file on a dataset split")
    _add_common(p_eval)
    p_eval.add_argument("--memories", required=True)
    p_eval.add_argument("--split", choices=("train", "test"), default="test")
    p_eval.add_argument("--similarity", choices=("cosine", "dot"), default=None)
    p_eval.set_defaults(func=_cmd_eval)

    p_bench = sub.add_parser("bench", help="multi-seed pipeline benchmark")
    _add_common(p_bench)
    p_bench.add_argument("--pipeline", choices=("hdc_base", "nn_derive"), default="hdc_base")
    p_bench.add_argument("--seeds", type=_seed_list, default=(0, 1, 2), help="e.g. 0,1,2")
    p_bench.add_argument("--similarity", choices=("cosine", "dot"), default=None)
    p_bench.add_argument("--activation", choices=("bipolarize", "tanh", "none"), default=None)
    p_bench.add_argument("--bipolarize", action="store_true", help="derived-encoder ablation")
    p_bench.add_argument("--retrain-epochs", type=int, default=20)
    p_bench.add_argument("--retrain-patience", type=int, default=5)
    p_bench.add_argument("--lr", type=float, default=0.001)
    p_bench.add_argument("--batch-size", type=int, default=64)
    p_bench.add_argument("--max-epochs", type=int, default=50)
    p_bench.add_argument("--patience", type=int, default=5)
    p_bench.add_argument("--min-delta-pp", type=float, default=0.1)
    p_bench.add_argument("--n-validation", type=int, default=5_000)
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Merge --config file values as subcommand defaults; flags still win."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return
    values = _parse_config_file(known.config)
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = argv[0] if argv and argv[0] in sub_action.choices else None
    if command is None:
        return
    sub_parser = sub_action.choices[command]
    actions = {a.dest: a for a in sub_parser._actions}
    overrides = {}
    for key, text in values.items():
        if key not in actions:
            raise ValueError(f"unknown config key {key!r} for command {command!r}")
        action = actions[key]
        if text.lower() == "none":
            overrides[key] = None
        elif isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            overrides[key] = _coerce(text, True)
        elif action.type is not None:
            overrides[key] = action.type(text)
        else:
            overrides[key] = text
    sub_parser.set_defaults(**overrides)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    _apply_config_file(parser, argv)
    args = parser.parse_args(argv)
    if getattr(args, "expected_counts", None) == "default":
        args.expected_counts = _default_counts(args.dataset)
    if getattr(args, "deterministic", False):
        try:
            from threadpoolctl import threadpool_limits

            threadpool_limits(1)
        except ImportError:
            print("warning: threadpoolctl unavailable; BLAS threads not pinned", file=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
