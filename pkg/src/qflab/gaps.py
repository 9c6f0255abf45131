"""Gap statistics for values of quadratic forms.

Positive forms: successor gaps over a window [tau, tau + horizon], with the
enumeration box chosen so that no value inside the window can be missed.
Indefinite forms: the maximal nearest-successor gap d(r) of the windowed value
set over the box B(r), plus Oppenheim-style density scans toward m(Q) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceededError
from .forms import QuadraticForm, ShiftVector
from .lattice import (MERGE_RTOL, ValueSpectrum, diagonal_value_dp,
                      dp_window_values, ellipsoid_candidates, enumerate_values,
                      _quad_values, _rational_shift)


@dataclass(frozen=True)
class GapReport:
    window: tuple[float, float]
    max_gap: float
    achieving_pair: tuple[float, float]
    n_values: int
    box_radius: float
    successor_sample: list    # [(value, successor, gap)] for the largest gaps


def _window_values_positive(form: QuadraticForm, a: np.ndarray, lo: float,
                            hi: float, budget: int) -> tuple[np.ndarray, float]:
    """All distinct values of Q[x-a] in [lo, hi], complete by the box bound
    |x_j - a_j| <= sqrt(hi / q_j) (diagonal) or |x - a| <= sqrt(hi/q0)."""
    shift = _rational_shift(a) if (form.is_exact and form.is_diagonal) else None
    if shift is not None:
        diag = form.exact_diagonal()
        m_ranges = []
        for j, q in enumerate(diag):
            rad = math.sqrt(hi / float(q)) * (1 + 1e-12) + 1e-9
            aj = float(shift[j])
            m_ranges.append((math.ceil(aj - rad), math.floor(aj + rad)))
        dp = diagonal_value_dp(diag, shift, m_ranges, cap=hi, budget=budget)
        pairs = dp_window_values(dp, (lo - 1.0, hi))
        vals = np.array([v for v, _ in pairs])
        radius = max(abs(b) for rng in m_ranges for b in rng)
        return vals, float(radius)
    X, _ = ellipsoid_candidates(form.matrix, a, hi, budget)
    vals = _quad_values(form.matrix, a, X)
    vals = np.unique(vals[vals <= hi])
    radius = math.sqrt(hi / form.q0) + float(np.max(np.abs(a), initial=0.0)) + 1.0
    return vals, radius


def _coalesce(vals: np.ndarray, scale: float) -> np.ndarray:
    if len(vals) == 0:
        return vals
    tol = MERGE_RTOL * max(1.0, abs(scale))
    out = [vals[0]]
    for v in vals[1:]:
        if v - out[-1] > tol:
            out.append(v)
    return np.array(out)


def max_gap_positive(form: QuadraticForm, a, tau: float, horizon: float,
                     budget: int = 10 ** 9, sample_size: int = 5) -> GapReport:
    """Windowed maximal gap between consecutive values of a positive form in
    [tau, tau + horizon]; an approximation of the ray supremum, reported as
    such."""
    if not form.is_positive:
        raise ValueError("not elliptic")
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    if isinstance(a, ShiftVector):
        a = a.a
    a = np.asarray(a, dtype=float)
    hi = tau + horizon
    vals, radius = _window_values_positive(form, a, tau, hi, budget)
    vals = _coalesce(np.sort(vals), hi)
    inside = vals[(vals >= tau) & (vals <= hi)]
    if len(inside) < 2:
        raise ValueError("insufficient values in the window")
    gaps = np.diff(inside)
    order = np.argsort(gaps)[::-1]
    top = [(float(inside[i]), float(inside[i + 1]), float(gaps[i]))
           for i in order[:sample_size]]
    imax = int(order[0])
    return GapReport(window=(tau, hi), max_gap=float(gaps[imax]),
                     achieving_pair=(float(inside[imax]), float(inside[imax + 1])),
                     n_values=len(inside), box_radius=radius,
                     successor_sample=top)


def max_gap_indefinite(form: QuadraticForm, a, r: float,
                       window: tuple[float, float],
                       budget: int = 10 ** 8) -> dict:
    """d(r): maximal nearest-successor gap of the windowed value set over B(r).

    Values without a successor inside the window do not start a gap.
    """
    if not form.is_indefinite:
        raise ValueError("not indefinite")
    spectrum = enumerate_values(form, a, r, window, budget=budget)
    vals = spectrum.values
    if len(vals) < 2:
        raise ValueError("insufficient values")
    gaps = np.diff(vals)
    imax = int(np.argmax(gaps))
    return {
        "d_r": float(gaps[imax]),
        "achieving_pair": (float(vals[imax]), float(vals[imax + 1])),
        "spectrum_size": len(vals),
        "spectrum": spectrum,
    }


def oppenheim_scan(form: QuadraticForm, a, target: tuple[float, float],
                   r_schedule: Sequence[float], budget: int = 10 ** 8,
                   exclude_zero: bool = True) -> dict:
    """Scan growing boxes for a value of Q[x-a] in the target interval.

    With `exclude_zero`, the trivial value at x = 0 (and exact zeros) is
    ignored, which makes targets like (-eps, eps) probe m(Q) = 0.  Exhaustion
    of the schedule is reported, never treated as a falsification.
    """
    alpha, beta = target
    if not alpha < beta:
        raise ValueError("target must be a nonempty interval")
    if isinstance(a, ShiftVector):
        a = a.a
    a = np.asarray(a, dtype=float)
    d = form.dim
    tried = []
    for r in r_schedule:
        half = int(r)
        n_box = (2 * half + 1) ** d
        if n_box > budget:
            raise BudgetExceededError(
                f"box of {n_box} points exceeds budget {budget}", required=n_box)
        grids = np.meshgrid(*([np.arange(-half, half + 1)] * d), indexing="ij")
        X = np.stack([g.ravel() for g in grids], axis=1)
        vals = _quad_values(form.matrix, a, X)
        mask = (vals > alpha) & (vals <= beta)
        if exclude_zero:
            mask &= np.abs(vals) > MERGE_RTOL
        hits = np.flatnonzero(mask)
        if len(hits):
            best = hits[np.argmin(np.abs(vals[hits]))]
            return {
                "found": True,
                "r": float(r),
                "witness": X[best].tolist(),
                "value": float(vals[best]),
                "schedule_tried": tried + [float(r)],
            }
        tried.append(float(r))
    return {"found": False, "r": None, "witness": None, "value": None,
            "schedule_tried": tried}
