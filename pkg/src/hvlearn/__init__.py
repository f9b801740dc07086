"""hvlearn: hyperdimensional computing classifiers with a scikit-learn
style API, plus derivation of HDC models from trained two-layer dense
networks."""

from .classifier import HdcClassifier
from .encoding import RecordEncoder, RgbRecordEncoder, encode_dataset
from .memory import (
    AssociativeMemory,
    ItemMemory,
    load_memories,
    random_item_memory,
    save_memories,
    zero_associative_memory,
)
from .network import (
    AdamState,
    DenseNet,
    DenseNetClassifier,
    adam_step,
    forward,
    init_dense_net,
    load_checkpoint,
    loss_and_gradients,
    save_checkpoint,
)
from .ops import (
    bind,
    bipolarize,
    bundle,
    cosine_scores,
    cosine_similarity,
    dot_scores,
    dot_similarity,
    hamming_distance,
    permute,
)
from .transplant import (
    DerivedModel,
    EquivalenceReport,
    derive,
    derive_from_checkpoint,
    derive_memories,
    save_derived,
    verify_equivalence,
    weight_fingerprint,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "AssociativeMemory",
    "DenseNet",
    "DenseNetClassifier",
    "DerivedModel",
    "EquivalenceReport",
    "HdcClassifier",
    "ItemMemory",
    "RecordEncoder",
    "RgbRecordEncoder",
    "adam_step",
    "bind",
    "bipolarize",
    "bundle",
    "cosine_scores",
    "cosine_similarity",
    "derive",
    "derive_from_checkpoint",
    "derive_memories",
    "dot_scores",
    "dot_similarity",
    "encode_dataset",
    "forward",
    "hamming_distance",
    "init_dense_net",
    "load_checkpoint",
    "load_memories",
    "loss_and_gradients",
    "permute",
    "random_item_memory",
    "save_checkpoint",
    "save_derived",
    "save_memories",
    "verify_equivalence",
    "weight_fingerprint",
    "zero_associative_memory",
    "__version__",
]
