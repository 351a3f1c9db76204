"""End-to-end acquisition pipeline, UE-position sweeps and Monte Carlo aggregation."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Sequence

import numpy as np

from .beamforming import optimal_theta, received_snr, reconstruct_ue_channel, to_db
from .channel import (
    RfParams,
    ap_irs_channel,
    corrupt_estimate,
    effective_rus_channel,
    irs_ue_channel,
    subband_frequencies,
)
from .codebook import build_codebook, search_codeword
from .delay import DelayGrid, delay_to_rus_ue_distance, estimate_delay
from .geometry import IrsLayout, Point3, RusSpec, distance, place_rus
from .positioning import (
    PositioningError,
    RangeObservation,
    SolverConfig,
    position_error,
    trilaterate,
)

AXES = ("x", "y")


@dataclass(frozen=True)
class SweepSpec:
    axis: str = "x"
    start: float = 0.5
    stop: float = 20.0
    step: float = 0.5
    sigma_e: tuple[float, ...] = (0.1,)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"sweep axis must be one of {AXES}, got {self.axis!r}")
        if not self.step > 0:
            raise ValueError("sweep step must be positive")
        if not self.start < self.stop:
            raise ValueError("sweep start must be below stop")
        for s in self.sigma_e:
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"sigma_e values must lie in [0, 1], got {s}")

    def coordinates(self) -> np.ndarray:
        return sweep_coordinates(self.start, self.stop, self.step)


@dataclass(frozen=True)
class ScenarioConfig:
    layout: IrsLayout = field(default_factory=IrsLayout)
    rus_count: int = 5
    rus_rows: int = 4
    rus_cols: int = 4
    rus_origins: tuple[tuple[int, int], ...] | None = None
    rf: RfParams = field(default_factory=RfParams)
    ap_position: Point3 = Point3(5.0, -5.0, 0.0)
    ue_position: Point3 = Point3(5.0, 3.0, 0.0)
    sigma_e: float = 0.1
    oversampling_v: int = 1
    oversampling_h: int = 1
    shared_codeword: bool = False
    noisy_search: bool = False
    delay_t_min: float = 0.0
    delay_t_max: float | None = None
    delay_coarse_step: float | None = None
    delay_refine_iterations: int = 2
    solver: SolverConfig = field(default_factory=SolverConfig)
    seed: int = 42
    trials: int = 50
    sweep: SweepSpec | None = None

    def __post_init__(self):
        if not self.ap_position.x > 0:
            raise ValueError("ap_position must have x > 0")
        if not self.ue_position.x > 0:
            raise ValueError("ue_position must have x > 0")
        if not 0.0 <= self.sigma_e <= 1.0:
            raise ValueError(f"sigma_e must lie in [0, 1], got {self.sigma_e}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        if self.rus_count < 3:
            raise ValueError("rus_count must be at least 3 to fix a position")
        # builds the grid and RUS set, raising on any inconsistency
        self.rus_set()
        self.check_unambiguous(self.ue_position)

    def delay_grid(self) -> DelayGrid:
        return DelayGrid.for_rf(
            self.rf,
            t_max=self.delay_t_max,
            coarse_step=self.delay_coarse_step,
            refine_iterations=self.delay_refine_iterations,
            t_min=self.delay_t_min,
        )

    def rus_set(self) -> list[RusSpec]:
        return place_rus(self.layout, self.rus_count, self.rus_rows, self.rus_cols, self.rus_origins)

    def check_unambiguous(self, ue) -> None:
        """Reject scenes whose longest AP-IRS-UE path falls outside the delay grid."""
        corners = [
            (0.0, 0.0, 0.0),
            (0.0, (self.layout.n_cols - 1) * self.layout.col_spacing, 0.0),
            (0.0, 0.0, (self.layout.n_rows - 1) * self.layout.row_spacing),
            (
                0.0,
                (self.layout.n_cols - 1) * self.layout.col_spacing,
                (self.layout.n_rows - 1) * self.layout.row_spacing,
            ),
        ]
        longest = max(distance(self.ap_position, c) + distance(ue, c) for c in corners)
        grid = self.delay_grid()
        if longest / self.rf.speed_of_light > grid.t_max:
            raise ValueError(
                f"scene path length {longest:.2f} m exceeds the delay search range "
                f"{grid.t_max * self.rf.speed_of_light:.2f} m"
            )


@dataclass(frozen=True)
class RusMeasurement:
    codeword_index: int
    delay: float
    range: float
    valid: bool


@dataclass(frozen=True)
class TrialResult:
    true_position: Point3
    estimated_position: Point3 | None
    position_error: float
    rus: tuple[RusMeasurement, ...]
    snr_proposed_db: float
    snr_upper_db: float
    snr_noopt_db: float
    acquisition_failed: bool


@dataclass(frozen=True)
class ResultRow:
    ue_x: float
    ue_y: float
    ue_z: float
    sigma_e: float
    trials: int
    snr_upper_db: float
    snr_proposed_db: float
    snr_noopt_db: float
    mean_pos_err_m: float
    failure_rate: float


RESULT_COLUMNS = tuple(ResultRow.__dataclass_fields__)


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for one ``(seed, *keys)`` work unit."""
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def sweep_coordinates(start: float, stop: float, step: float) -> np.ndarray:
    if not step > 0 or not start < stop:
        raise ValueError("sweep needs step > 0 and start < stop")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def acquisition_symbol_count(codebook_size: int, rus_count: int, shared_codeword: bool) -> int:
    """OFDM symbols spent on codeword search plus RUS activations."""
    if shared_codeword:
        return codebook_size + rus_count - 1
    return codebook_size * rus_count


def run_acquisition(config: ScenarioConfig, trial_index: int = 0, point_index: int = 0) -> TrialResult:
    """Run the four acquisition steps once and score the result against the true channel.

    Steps: per-RUS codeword search, noisy wideband estimate and delay/range
    extraction; trilateration; channel reconstruction at the estimated
    position; phase-conjugate reflection.  Noise for RUS ``m`` is drawn from
    the substream ``(seed, point_index, trial_index, m)``.
    """
    layout, rf = config.layout, config.rf
    ap, ue = config.ap_position, config.ue_position
    rus_list = config.rus_set()
    codebook = build_codebook(config.rus_rows, config.rus_cols, config.oversampling_v, config.oversampling_h)
    freqs = subband_frequencies(rf)
    grid = config.delay_grid()

    shared_index = None
    measurements = []
    observations = []
    for m, rus in enumerate(rus_list):
        rng = substream(config.seed, point_index, trial_index, m)
        if config.shared_codeword and shared_index is not None:
            index = shared_index
        else:
            search_sigma = config.sigma_e if config.noisy_search else 0.0
            index, _ = search_codeword(codebook, layout, rus, ap, ue, rf, search_sigma, rng)
            shared_index = index
        hbar = effective_rus_channel(layout, rus, codebook.codewords[index], ap, ue, rf, freqs)
        hbar_hat = corrupt_estimate(hbar, config.sigma_e, rng)
        t_hat = estimate_delay(hbar_hat, freqs, grid)
        rng_m, valid = delay_to_rus_ue_distance(t_hat, distance(ap, rus.center), rf)
        measurements.append(RusMeasurement(index, t_hat, rng_m, valid))
        observations.append(RangeObservation(rus.center, rng_m, valid))

    h = ap_irs_channel(layout, ap, rf, rf.center_frequency)
    g = irs_ue_channel(layout, ue, rf, rf.center_frequency)
    sigma2 = rf.noise_power
    upper = received_snr(g, h, optimal_theta(g, h), sigma2)
    noopt = received_snr(g, h, np.ones_like(h), sigma2)

    try:
        estimate = trilaterate(observations, config.solver)
    except PositioningError:
        estimate = None
    if estimate is None:
        p_hat, err, proposed = None, math.nan, noopt
    else:
        p_hat = estimate.point
        err = position_error(p_hat, ue)
        g_hat = reconstruct_ue_channel(layout, p_hat, rf, rf.center_frequency)
        proposed = received_snr(g, h, optimal_theta(g_hat, h), sigma2)

    return TrialResult(
        true_position=ue,
        estimated_position=p_hat,
        position_error=err,
        rus=tuple(measurements),
        snr_proposed_db=to_db(proposed),
        snr_upper_db=to_db(upper),
        snr_noopt_db=to_db(noopt),
        acquisition_failed=estimate is None,
    )


def aggregate_trials(results: Sequence[TrialResult], sigma_e: float) -> ResultRow:
    """Average SNRs in the linear domain and report in dB; failed trials keep their fallback SNR."""
    if not results:
        raise ValueError("no trials to aggregate")
    lin = lambda key: to_db(np.mean([10.0 ** (getattr(r, key) / 10.0) for r in results]))
    errors = [r.position_error for r in results if not r.acquisition_failed]
    p = results[0].true_position
    return ResultRow(
        ue_x=p.x,
        ue_y=p.y,
        ue_z=p.z,
        sigma_e=sigma_e,
        trials=len(results),
        snr_upper_db=lin("snr_upper_db"),
        snr_proposed_db=lin("snr_proposed_db"),
        snr_noopt_db=lin("snr_noopt_db"),
        mean_pos_err_m=float(np.mean(errors)) if errors else math.nan,
        failure_rate=sum(r.acquisition_failed for r in results) / len(results),
    )


def _run_point(config: ScenarioConfig, point_index: int) -> ResultRow:
    results = [run_acquisition(config, t, point_index) for t in range(config.trials)]
    return aggregate_trials(results, config.sigma_e)


def _resolve_workers(workers: int | None) -> int:
    if workers is None or workers == 1:
        return 1
    if workers <= 0:
        return os.cpu_count() or 1
    return workers


def run_sweep(
    base: ScenarioConfig,
    axis: str = "x",
    start: float = 0.5,
    stop: float = 20.0,
    step: float = 0.5,
    trials: int | None = None,
    sigma_e: Sequence[float] | None = None,
    workers: int | None = 1,
) -> list[ResultRow]:
    """Move the UE along ``axis`` and aggregate ``trials`` acquisitions per position.

    Rows come back ordered by position, then by ``sigma_e``.  ``workers``
    greater than one (or ``<= 0`` for all CPUs) spreads positions over
    processes; the output does not depend on it.
    """
    if axis not in AXES:
        raise ValueError(f"sweep axis must be one of {AXES}, got {axis!r}")
    coords = sweep_coordinates(start, stop, step)
    sigmas = (base.sigma_e,) if sigma_e is None else tuple(sigma_e)
    trials = base.trials if trials is None else trials
    jobs = []
    for i, c in enumerate(coords):
        ue = base.ue_position._replace(**{axis: float(c)})
        for s in sigmas:
            jobs.append((replace(base, ue_position=ue, sigma_e=float(s), trials=trials), i))

    n = _resolve_workers(workers)
    if n == 1:
        return [_run_point(cfg, i) for cfg, i in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_run_point, *zip(*jobs)))


def run_configured_sweep(config: ScenarioConfig, workers: int | None = 1) -> list[ResultRow]:
    sw = config.sweep or SweepSpec()
    return run_sweep(config, sw.axis, sw.start, sw.stop, sw.step, config.trials, sw.sigma_e, workers)


def aggregate_gain(records: Sequence[ResultRow]) -> float:
    """Mean over positions of the proposed-minus-fixed-coefficient SNR gain, in dB."""
    if not records:
        raise ValueError("no records to aggregate")
    return float(np.mean([r.snr_proposed_db - r.snr_noopt_db for r in records]))


def linear_mean_gain(records: Sequence[ResultRow]) -> float:
    """Ratio, in dB, of the position-averaged linear SNRs of proposed and fixed coefficients."""
    if not records:
        raise ValueError("no records to aggregate")
    mean_lin = lambda key: np.mean([10.0 ** (getattr(r, key) / 10.0) for r in records])
    return to_db(mean_lin("snr_proposed_db") / mean_lin("snr_noopt_db"))
