"""Bartlett (matched-filter) delay estimation over the subband channel."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import RfParams


@dataclass(frozen=True)
class DelayGrid:
    t_min: float
    t_max: float
    coarse_step: float
    refine_iterations: int = 2

    def __post_init__(self):
        if not 0 <= self.t_min < self.t_max:
            raise ValueError("delay grid needs 0 <= t_min < t_max")
        if not self.coarse_step > 0:
            raise ValueError("coarse_step must be positive")
        if self.refine_iterations < 0:
            raise ValueError("refine_iterations must be non-negative")

    @classmethod
    def for_rf(
        cls,
        rf: RfParams,
        t_max: float | None = None,
        coarse_step: float | None = None,
        refine_iterations: int = 2,
        t_min: float = 0.0,
    ) -> "DelayGrid":
        """Default grid: quarter of the delay resolution, up to 95% of the alias period."""
        limit = 0.95 / rf.subband_width
        t_max = limit if t_max is None else t_max
        if t_max > 1.0 / rf.subband_width:
            raise ValueError(
                f"t_max={t_max:.4g} s exceeds the unambiguous delay range 1/F_d={1 / rf.subband_width:.4g} s"
            )
        if coarse_step is None:
            coarse_step = 1.0 / (4 * rf.bandwidth)
        elif coarse_step > 1.0 / (2 * rf.bandwidth):
            raise ValueError("coarse_step must be at most half the delay resolution 1/(K F_d)")
        return cls(t_min, t_max, coarse_step, refine_iterations)

    def points(self) -> np.ndarray:
        n = int(np.floor((self.t_max - self.t_min) / self.coarse_step + 1e-9)) + 1
        return self.t_min + self.coarse_step * np.arange(n)


def steering_vector(frequencies, t: float) -> np.ndarray:
    return np.exp(2j * np.pi * np.asarray(frequencies, dtype=float) * t)


def bartlett_spectrum(hhat, frequencies, times) -> np.ndarray:
    """``|hhat . b(t)|**2`` for every ``t`` in ``times``."""
    hhat = np.asarray(hhat, dtype=complex)
    frequencies = np.asarray(frequencies, dtype=float)
    if hhat.shape != frequencies.shape:
        raise ValueError(f"channel length {hhat.size} != number of frequencies {frequencies.size}")
    # factor out the lowest frequency so the phase argument stays small
    f0 = frequencies[0]
    times = np.atleast_1d(np.asarray(times, dtype=float))
    base = np.exp(2j * np.pi * np.outer(times, frequencies - f0)) @ hhat
    return np.abs(base) ** 2


@lru_cache(maxsize=8)
def _coarse_steering(grid: DelayGrid, freq_bytes: bytes) -> np.ndarray:
    frequencies = np.frombuffer(freq_bytes, dtype=float)
    m = np.exp(2j * np.pi * np.outer(grid.points(), frequencies - frequencies[0]))
    m.flags.writeable = False
    return m


def bartlett_power(hhat, frequencies, t: float) -> float:
    return float(bartlett_spectrum(hhat, frequencies, [t])[0])


def estimate_delay(hhat, frequencies, grid: DelayGrid) -> float:
    """Coarse-grid argmax of the Bartlett spectrum, refined by repeated parabolic fits.

    Each refinement round fits a parabola through the spectrum at
    ``t - s, t, t + s``, moves to its vertex, then shrinks ``s`` by 4.
    """
    hhat = np.asarray(hhat, dtype=complex)
    frequencies = np.ascontiguousarray(frequencies, dtype=float)
    if hhat.shape != frequencies.shape:
        raise ValueError(f"channel length {hhat.size} != number of frequencies {frequencies.size}")
    times = grid.points()
    spectrum = np.abs(_coarse_steering(grid, frequencies.tobytes()) @ hhat) ** 2
    t = float(times[int(np.argmax(spectrum))])
    step = grid.coarse_step
    for _ in range(grid.refine_iterations):
        lo, mid, hi = bartlett_spectrum(hhat, frequencies, [t - step, t, t + step])
        curvature = lo - 2.0 * mid + hi
        if curvature < 0:
            t += float(np.clip(0.5 * step * (lo - hi) / curvature, -step, step))
        step /= 4.0
    return float(np.clip(t, grid.t_min, grid.t_max))


def delay_to_rus_ue_distance(t_hat: float, d_ap_rus: float, rf: RfParams) -> tuple[float, bool]:
    """RUS-UE range from the AP-RUS-UE delay; ``valid`` is False unless the range is positive."""
    rng = rf.speed_of_light * t_hat - d_ap_rus
    return rng, bool(rng > 0)
