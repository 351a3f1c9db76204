"""Oversampled 2D DFT codebook for an RUS and the UE-feedback codeword search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import RfParams, complex_normal, rus_cascade
from .geometry import IrsLayout, RusSpec


def dft_codeword(m_v: int, m_h: int, o1: int, o2: int, p: int, l: int) -> np.ndarray:
    """Codeword ``v_{l,p}`` flattened column-major (vertical index fastest)."""
    if not 0 <= p < o1 * m_v:
        raise ValueError(f"vertical beam index p={p} outside [0, {o1 * m_v})")
    if not 0 <= l < o2 * m_h:
        raise ValueError(f"horizontal beam index l={l} outside [0, {o2 * m_h})")
    u = np.exp(2j * np.pi * p * np.arange(m_v) / (o1 * m_v))
    v = np.exp(2j * np.pi * l * np.arange(m_h) / (o2 * m_h))
    return np.outer(v, u).ravel()


@dataclass(frozen=True)
class Codebook:
    codewords: np.ndarray  # (size, M)
    m_v: int
    m_h: int
    o1: int = 1
    o2: int = 1

    def __len__(self) -> int:
        return self.codewords.shape[0]

    def flat_index(self, p: int, l: int) -> int:
        return p * (self.o2 * self.m_h) + l

    def beam_indices(self, index: int) -> tuple[int, int]:
        return divmod(index, self.o2 * self.m_h)


def build_codebook(m_v: int, m_h: int, o1: int = 1, o2: int = 1) -> Codebook:
    if min(m_v, m_h, o1, o2) < 1:
        raise ValueError("codebook dimensions and oversampling factors must be positive")
    words = [
        dft_codeword(m_v, m_h, o1, o2, p, l)
        for p in range(o1 * m_v)
        for l in range(o2 * m_h)
    ]
    return Codebook(np.array(words), m_v, m_h, o1, o2)


def search_codeword(
    codebook: Codebook,
    layout: IrsLayout,
    rus: RusSpec,
    ap_pos,
    ue_pos,
    rf: RfParams,
    sigma_e: float = 0.0,
    rng: np.random.Generator | None = None,
) -> tuple[int, float]:
    """Exhaustive search for the codeword with the strongest UE-side power.

    Each trial observes ``|hbar(F_c) + z|**2`` with ``z ~ CN(0, noise_power)``;
    the observation is noiseless when ``sigma_e == 0`` or no ``rng`` is
    given.  Ties go to the lowest index.
    """
    if len(codebook) == 0:
        raise ValueError("empty codebook")
    cascade = rus_cascade(layout, rus, ap_pos, ue_pos, rf, rf.center_frequency)[0]
    received = codebook.codewords @ cascade
    if sigma_e > 0 and rng is not None:
        received = received + np.sqrt(rf.noise_power) * complex_normal(rng, received.shape)
    power = np.abs(received) ** 2
    best = int(np.argmax(power))
    return best, float(power[best])
