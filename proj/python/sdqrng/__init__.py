"""Simulated self-differencing QRNG and statistical test battery."""

from ._core import (
    DomainError,
    SimConfig,
    __version__,
    battery,
    byte_correlation,
    dead_time_limited_rate,
    find_peak,
    frequency_monobit,
    gate_detection_prob,
    parity_bits,
    proportion_interval,
    sd_rate,
    simulate,
    sweep_rate,
)

__all__ = [
    "DomainError",
    "SimConfig",
    "battery",
    "byte_correlation",
    "dead_time_limited_rate",
    "find_peak",
    "frequency_monobit",
    "gate_detection_prob",
    "parity_bits",
    "proportion_interval",
    "sd_rate",
    "simulate",
    "sweep_rate",
]
