"""Near-field line-of-sight channels between the AP, the IRS units and the UE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import IrsLayout, RusSpec

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class RfParams:
    center_frequency: float = 28e9
    subband_count: int = 128
    subband_width: float = 3.6e6
    pathloss_constant: float = 2.0
    pathloss_exponent: float = 2.0
    noise_power: float = 1e-3
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if self.subband_count < 1:
            raise ValueError("subband_count must be a positive integer")
        if not self.subband_width > 0:
            raise ValueError("subband_width must be positive")
        if not self.center_frequency > self.subband_count * self.subband_width / 2:
            raise ValueError("center_frequency must exceed half the total bandwidth")
        if not self.pathloss_constant > 0:
            raise ValueError("pathloss_constant must be positive")
        if not self.pathloss_exponent >= 0:
            raise ValueError("pathloss_exponent must be non-negative")
        if not self.noise_power > 0:
            raise ValueError("noise_power must be positive")

    @property
    def bandwidth(self) -> float:
        return self.subband_count * self.subband_width


def subband_frequencies(rf: RfParams) -> np.ndarray:
    """Centres of ``K`` equal subbands laid symmetrically about the carrier."""
    k = np.arange(1, rf.subband_count + 1)
    return rf.center_frequency - rf.bandwidth / 2 + (k - 0.5) * rf.subband_width


def path_loss(alpha: float, gamma: float, d):
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("path loss is undefined for non-positive distance")
    out = alpha / d**gamma
    return float(out) if out.ndim == 0 else out


def los_coefficient(rf: RfParams, f, d):
    """``alpha / d**gamma * exp(-j 2 pi f d / c)``; broadcasts over ``f`` and ``d``."""
    d = np.asarray(d, dtype=float)
    amp = path_loss(rf.pathloss_constant, rf.pathloss_exponent, d)
    out = amp * np.exp(-2j * np.pi * np.asarray(f, dtype=float) * d / rf.speed_of_light)
    return complex(out) if np.ndim(out) == 0 else out


def _unit_distances(positions: np.ndarray, point) -> np.ndarray:
    return np.linalg.norm(positions - np.asarray(point, dtype=float), axis=-1)


def point_channel(positions: np.ndarray, point, rf: RfParams, f) -> np.ndarray:
    """Channel between ``point`` and each row of ``positions``.

    Scalar ``f`` gives shape ``(N,)``; a frequency vector gives ``(K, N)``.
    """
    d = _unit_distances(positions, point)
    if np.any(d <= 0):
        raise ValueError(f"point {tuple(point)} coincides with a reflecting unit")
    f = np.asarray(f, dtype=float)
    return los_coefficient(rf, f[..., None] if f.ndim else f, d)


def ap_irs_channel(layout: IrsLayout, ap_pos, rf: RfParams, f) -> np.ndarray:
    return point_channel(layout.positions(), ap_pos, rf, f)


def irs_ue_channel(layout: IrsLayout, ue_pos, rf: RfParams, f) -> np.ndarray:
    return point_channel(layout.positions(), ue_pos, rf, f)


def rus_cascade(layout: IrsLayout, rus: RusSpec, ap_pos, ue_pos, rf: RfParams, f) -> np.ndarray:
    """Per-member cascaded channel ``g_i * h_i`` over frequencies ``f`` (shape ``(K, M)``)."""
    pos = layout.positions()[np.asarray(rus.member_indices) - 1]
    f = np.atleast_1d(np.asarray(f, dtype=float))
    return point_channel(pos, ue_pos, rf, f) * point_channel(pos, ap_pos, rf, f)


def effective_rus_channel(
    layout: IrsLayout, rus: RusSpec, codeword, ap_pos, ue_pos, rf: RfParams, freqs=None
) -> np.ndarray:
    """Wideband AP-RUS-UE channel with only ``rus`` reflecting, one value per subband."""
    w = np.asarray(codeword, dtype=complex).ravel()
    if w.size != rus.size:
        raise ValueError(f"codeword length {w.size} does not match RUS size {rus.size}")
    if np.any(np.abs(w) > 1 + 1e-12):
        raise ValueError("codeword entries must satisfy |w| <= 1")
    if freqs is None:
        freqs = subband_frequencies(rf)
    return rus_cascade(layout, rus, ap_pos, ue_pos, rf, freqs) @ w


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with unit variance."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def corrupt_estimate(hbar, sigma_e: float, rng: np.random.Generator) -> np.ndarray:
    """Noisy channel estimate ``sqrt(1 - s**2) * hbar_n + s * z``.

    ``hbar`` is first scaled to unit mean per-element power, so ``sigma_e``
    acts as a relative estimate quality.  An all-zero input stays zero before
    the noise is added.
    """
    if not 0.0 <= sigma_e <= 1.0:
        raise ValueError(f"sigma_e must lie in [0, 1], got {sigma_e}")
    hbar = np.asarray(hbar, dtype=complex)
    power = np.mean(np.abs(hbar) ** 2)
    normed = hbar / np.sqrt(power) if power > 0 else hbar.copy()
    if sigma_e == 0.0:
        return normed
    return np.sqrt(1.0 - sigma_e**2) * normed + sigma_e * complex_normal(rng, hbar.shape)
