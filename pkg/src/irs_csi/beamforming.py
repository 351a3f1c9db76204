"""Reflection-coefficient design from a reconstructed UE channel, and SNR evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import RfParams, irs_ue_channel
from .geometry import IrsLayout


@dataclass(frozen=True)
class ReflectState:
    theta: np.ndarray

    def __post_init__(self):
        if np.any(np.abs(self.theta) > 1 + 1e-12):
            raise ValueError("reflection coefficients must satisfy |theta_n| <= 1")


def reconstruct_ue_channel(layout: IrsLayout, p_hat, rf: RfParams, f) -> np.ndarray:
    if p_hat[0] < 0:
        raise ValueError("estimated UE position must have x >= 0")
    return irs_ue_channel(layout, p_hat, rf, f)


def optimal_theta(g_hat, h) -> ReflectState:
    """Phase-conjugate coefficients ``conj(g_n h_n) / |g_n h_n|``; 1 where the product vanishes."""
    prod = np.asarray(g_hat, dtype=complex) * np.asarray(h, dtype=complex)
    mag = np.abs(prod)
    theta = np.ones_like(prod)
    nz = mag > 0
    theta[nz] = np.conj(prod[nz]) / mag[nz]
    return ReflectState(theta)


def received_snr(g, h, theta, noise_power: float) -> float:
    """Linear SNR ``|(g * h) . theta|**2 / sigma**2``."""
    g = np.asarray(g, dtype=complex)
    h = np.asarray(h, dtype=complex)
    theta = np.asarray(getattr(theta, "theta", theta), dtype=complex)
    if not g.shape == h.shape == theta.shape:
        raise ValueError(f"shape mismatch: g{g.shape}, h{h.shape}, theta{theta.shape}")
    if not noise_power > 0:
        raise ValueError("noise_power must be positive")
    return float(np.abs(np.sum(g * h * theta)) ** 2 / noise_power)


def to_db(x) -> float:
    return float(10.0 * np.log10(x))
