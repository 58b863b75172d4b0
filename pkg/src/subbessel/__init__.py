"""Subordinated Bessel heat kernels, their envelopes and numerical checks of both."""

__version__ = "0.1.0"

from .bessel_kernel import KernelParams, log_p2, p2  # noqa: E402
from .errors import ConfigError, DomainError, HypothesisError, QuadratureError  # noqa: E402
from .subordinated import BatchedKernel, GridKernel, kernel, p_alpha, p_alpha1_closed  # noqa: E402

__all__ = [
    "KernelParams",
    "p2",
    "log_p2",
    "p_alpha",
    "p_alpha1_closed",
    "kernel",
    "GridKernel",
    "BatchedKernel",
    "DomainError",
    "QuadratureError",
    "HypothesisError",
    "ConfigError",
]
