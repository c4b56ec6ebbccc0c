"""Ordinal impact model: rank features, loss kernels, fitting."""

from .backend import KERNEL_BACKEND, loss_grad
from .features import (
    NUM_FEATURES,
    NUM_RANK_SLOTS,
    TrainingSet,
    build_features,
    build_training_set,
    rank_slots,
)
from .model import OrdinalModel, annotate_fused, fit, it_loss_and_gradient

__all__ = [
    "KERNEL_BACKEND",
    "NUM_FEATURES",
    "NUM_RANK_SLOTS",
    "OrdinalModel",
    "TrainingSet",
    "annotate_fused",
    "build_features",
    "build_training_set",
    "fit",
    "it_loss_and_gradient",
    "loss_grad",
    "rank_slots",
]
