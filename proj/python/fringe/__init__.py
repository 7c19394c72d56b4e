"""Single-frame fringe-pattern analysis: synthesis, phase-shifting, FT/WFT and
two-stage neural demodulation, temporal unwrapping and evaluation."""

from ._core import (
    IoError,
    Model,
    NumericError,
    ValidationError,
    demod_neural,
    fit_sphere,
    ft_demod,
    load_model,
    make_sample,
    phase_error,
    ps_demod,
    read_image,
    temporal_unwrap,
    wft_demod,
    wrap_phase,
)

__all__ = [
    "IoError",
    "Model",
    "NumericError",
    "ValidationError",
    "demod_neural",
    "fit_sphere",
    "ft_demod",
    "load_model",
    "make_sample",
    "phase_error",
    "ps_demod",
    "read_image",
    "temporal_unwrap",
    "wft_demod",
    "wrap_phase",
]
