"""Masked-autoencoder pipeline for XRF core-scanning spectra.

Thin python surface over the C++ core: synthetic corpus generation,
transforms, patch masking, pretraining, fine-tuning, evaluation, and
saliency. See the individual function docstrings on `maxrf._core`.
"""

from ._core import (
    Checkpoint,
    DataError,
    EvalReport,
    GeochemLabel,
    MaskPlan,
    MetricRow,
    ModelConfig,
    NumericError,
    SaliencyMap,
    Spectrum,
    SyntheticConfig,
    Task,
    TrainConfig,
    TransformKind,
    channel_to_energy,
    evaluate_reconstruction,
    evaluate_regression,
    finetune,
    instance_normalize,
    load_checkpoint,
    load_labels,
    load_spectra,
    log_transform,
    pretrain,
    r_squared,
    saliency_map,
    sample_mask,
    save_checkpoint,
    save_labels,
    save_spectra,
    synth_labels,
    synth_spectra,
)

__all__ = [
    "Checkpoint",
    "DataError",
    "EvalReport",
    "GeochemLabel",
    "MaskPlan",
    "MetricRow",
    "ModelConfig",
    "NumericError",
    "SaliencyMap",
    "Spectrum",
    "SyntheticConfig",
    "Task",
    "TrainConfig",
    "TransformKind",
    "channel_to_energy",
    "evaluate_reconstruction",
    "evaluate_regression",
    "finetune",
    "instance_normalize",
    "load_checkpoint",
    "load_labels",
    "load_spectra",
    "log_transform",
    "pretrain",
    "r_squared",
    "saliency_map",
    "sample_mask",
    "save_checkpoint",
    "save_labels",
    "save_spectra",
    "synth_labels",
    "synth_spectra",
]
