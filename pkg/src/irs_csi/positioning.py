"""Range-based trilateration of the UE from RUS centres.

All RUS centres sit in the IRS plane, so a point and its mirror image through
that plane fit the ranges equally well.  The solver keeps the solution on the
``x >= 0`` side, where both AP and UE live.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Point3


@dataclass(frozen=True)
class RangeObservation:
    anchor: Point3
    range: float
    valid: bool = True


@dataclass(frozen=True)
class PositionEstimate:
    point: Point3
    residual_rms: float
    iterations_used: int
    converged: bool


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 100
    initial_damping: float = 1e-3
    step_tol: float = 1e-9
    grad_tol: float = 1e-12


class PositioningError(ValueError):
    """Too few usable ranges to fix a position."""


def _residuals(p: np.ndarray, anchors: np.ndarray, ranges: np.ndarray):
    diff = p - anchors
    dist = np.linalg.norm(diff, axis=1)
    safe = np.where(dist > 0, dist, 1.0)
    jac = diff / safe[:, None]
    return dist - ranges, jac


def _reflect(p: np.ndarray) -> np.ndarray:
    if p[0] < 0:
        p = p.copy()
        p[0] = -p[0]
    return p


def linear_initial_guess(anchors: np.ndarray, ranges: np.ndarray) -> np.ndarray:
    """Closed-form start from differenced squared-range equations.

    The differenced system only pins the component of the position inside the
    anchors' span; the out-of-span offset is recovered from the first range
    and placed on the ``x >= 0`` side.
    """
    a0, r0 = anchors[0], ranges[0]
    A = 2.0 * (anchors[1:] - a0)
    b = r0**2 - ranges[1:] ** 2 + np.sum(anchors[1:] ** 2, axis=1) - np.sum(a0**2)
    p, *_ = np.linalg.lstsq(A, b, rcond=None)
    _, sv, vt = np.linalg.svd(anchors[1:] - a0)
    rank = int(np.sum(sv > sv[0] * 1e-10)) if sv.size else 0
    if rank >= 3:
        return _reflect(p)
    # lstsq returned the minimum-norm solution: shift it onto the anchor plane
    # along the null direction, then lift by the residual height
    normal = vt[2] if rank == 2 else None
    if normal is None:
        return _reflect(p)
    if normal[0] < 0 or (normal[0] == 0 and np.sum(normal) < 0):
        normal = -normal
    p = p + (np.dot(a0, normal) - np.dot(p, normal)) * normal
    height = math.sqrt(max(r0**2 - float(np.sum((p - a0) ** 2)), 0.0))
    return _reflect(p + height * normal)


def _solve(p: np.ndarray, anchors: np.ndarray, ranges: np.ndarray, config: "SolverConfig"):
    r, J = _residuals(p, anchors, ranges)
    cost = float(r @ r)
    lam = config.initial_damping
    converged = False
    it = 0
    for it in range(1, config.max_iterations + 1):
        grad = J.T @ r
        if np.linalg.norm(grad) < config.grad_tol:
            converged = True
            break
        step = np.linalg.solve(J.T @ J + lam * np.eye(3), -grad)
        trial = _reflect(p + step)
        r_new, J_new = _residuals(trial, anchors, ranges)
        cost_new = float(r_new @ r_new)
        if cost_new <= cost:
            moved = float(np.linalg.norm(trial - p))
            p, r, J, cost = trial, r_new, J_new, cost_new
            lam = max(lam / 10.0, 1e-15)
            if moved < config.step_tol:
                converged = True
                break
        else:
            if np.linalg.norm(step) < config.step_tol:
                converged = True
                break
            lam *= 10.0
            if lam > 1e12:
                break
    return p, cost, it, converged


def trilaterate(
    observations: Sequence[RangeObservation],
    config: SolverConfig = SolverConfig(),
    initial=None,
) -> PositionEstimate:
    """Least-squares position from ranges to known anchors, restricted to ``x >= 0``.

    Minimises ``sum((|P_m - P| - d_m)**2)`` with a Levenberg-damped
    Gauss-Newton iteration on the range residuals.  Invalid observations are
    ignored; fewer than three valid ones raise :class:`PositioningError`.
    ``initial`` overrides the closed-form start (any negative x is mirrored).
    """
    usable = [o for o in observations if o.valid]
    if len(usable) < 3:
        raise PositioningError(f"need at least 3 valid ranges, got {len(usable)}")
    anchors = np.array([o.anchor for o in usable], dtype=float)
    ranges = np.array([o.range for o in usable], dtype=float)

    if initial is not None:
        starts = [_reflect(np.asarray(initial, dtype=float))]
    else:
        # the linear start can land on the anchor plane, where the out-of-plane
        # gradient vanishes; a second start straight out from the centroid
        # covers that case
        _, _, vt = np.linalg.svd(anchors - anchors.mean(axis=0))
        normal = vt[-1] if vt[-1][0] >= 0 else -vt[-1]
        starts = [
            linear_initial_guess(anchors, ranges),
            anchors.mean(axis=0) + float(np.mean(ranges)) * normal,
        ]
    best = None
    for start in starts:
        result = _solve(start, anchors, ranges, config)
        if best is None or result[1] < best[1]:
            best = result
    p, cost, it, converged = best
    return PositionEstimate(
        Point3.of(p), math.sqrt(cost / len(ranges)), it, converged
    )


def position_error(p_hat, p) -> float:
    return float(math.dist(tuple(p_hat), tuple(p)))
