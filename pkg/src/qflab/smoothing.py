"""Smoothing measures, correction densities, and the expansion F = F0 + sum F_j.

Per coordinate, the lattice measure mu is the uniform weight on [-[R],[R]]
convolved k times with the uniform weight on [-[r],[r]]; the continuous
measure nu equals mu convolved with the (k+1)-fold unit-cell density, so its
density D is a product of per-coordinate factors

    D1(x) = sum_m W(m) b_{k+1}(x - m),

with b_n the centered Irwin-Hall density.  Correction densities D_j contract
derivatives of D against moments of the (k+1)-fold cell measure; for the
product density they reduce to sums of products of 1-d factor derivatives,
enumerated over even multi-indices.  F-values against mu are exact weighted
lattice sums (diagonal DP or pruned enumeration); F-values against nu and
nu_j are importance-sampled Monte Carlo with D as the proposal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceededError
from .forms import QuadraticForm, ShiftVector
from .lattice import (DiagonalDP, diagonal_value_dp, dp_count_le,
                      ellipsoid_candidates, _rational_shift)
from .trig import gamma_estimate
from .util import spawn_rngs, worker_chunks
from .volume import McEstimate

DEFAULT_MC_SAMPLES = 10 ** 6


# ---------------------------------------------------------------------------
# Irwin-Hall density (centered) and cell-measure moments
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _ih_coeffs(n: int):
    return [(-1) ** i * math.comb(n, i) for i in range(n + 1)]


def irwin_hall(x: np.ndarray, n: int, deriv: int = 0) -> np.ndarray:
    """deriv-th derivative of the density of a sum of n uniforms on (-1/2, 1/2).

    Valid for deriv <= n - 2 (where the density is still continuous).
    """
    if deriv > n - 2:
        raise ValueError(f"derivative order {deriv} needs n >= {deriv + 2}")
    y = np.asarray(x, dtype=float) + n / 2.0
    p = n - 1 - deriv
    out = np.zeros_like(y)
    for i, c in enumerate(_ih_coeffs(n)):
        t = np.maximum(y - i, 0.0)
        out += c * t ** p
    return out / math.factorial(p)


def irwin_hall_cdf(x: np.ndarray, n: int) -> np.ndarray:
    y = np.asarray(x, dtype=float) + n / 2.0
    out = np.zeros_like(y)
    for i, c in enumerate(_ih_coeffs(n)):
        t = np.clip(y - i, 0.0, None)
        out += c * t ** n
    return out / math.factorial(n)


@lru_cache(maxsize=None)
def _uniform_cell_moments(fold: int, max_order: int) -> tuple[Fraction, ...]:
    """Moments E[S^t] of a sum of `fold` iid uniforms on (-1/2, 1/2), exact."""
    base = [Fraction(0)] * (max_order + 1)
    for t in range(0, max_order + 1, 2):
        base[t] = Fraction(1, (t + 1) * 2 ** t)
    mom = [Fraction(1)] + [Fraction(0)] * max_order
    for _ in range(fold):
        new = [Fraction(0)] * (max_order + 1)
        for t in range(max_order + 1):
            new[t] = sum(math.comb(t, i) * mom[i] * base[t - i]
                         for i in range(t + 1))
        mom = new
    return tuple(mom)


def moments_pi(k: int, eta: Sequence[int]) -> Fraction:
    """Moment of the (k+1)-fold cell measure for the multi-order eta; exact.

    Cross-coordinate moments factor; any odd order gives 0 by symmetry.
    """
    if any(o < 0 for o in eta):
        raise ValueError("orders must be >= 0")
    if any(o % 2 for o in eta):
        return Fraction(0)
    max_o = max(eta, default=0)
    mom = _uniform_cell_moments(k + 1, max_o)
    out = Fraction(1)
    for o in eta:
        out *= mom[o]
    return out


# ---------------------------------------------------------------------------
# scheme
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothingScheme:
    R: float
    r: float
    k: int
    numerators: np.ndarray      # object ints over offsets [-Hw, Hw]
    normalizer: int
    weights: np.ndarray         # floats, sum 1 per coordinate

    @property
    def HR(self) -> int:
        return int(self.R)

    @property
    def hr(self) -> int:
        return int(self.r)

    @property
    def half_support(self) -> int:
        return self.HR + self.k * self.hr

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.half_support, self.half_support + 1)

    @property
    def r_bar(self) -> float:
        return self.hr + 0.5

    @property
    def R_bar(self) -> float:
        return self.HR + 0.5

    @property
    def lattice_core(self) -> int:
        """Lattice points with |m| <= this carry exactly the weight (2 Rbar)^-1."""
        return self.HR - self.k * self.hr

    @property
    def continuous_core(self) -> float:
        """D1 is exactly (2 Rbar)^-1 on |x| <= Rbar - k rbar."""
        return self.R_bar - self.k * self.r_bar

    @property
    def continuous_support(self) -> float:
        return self.R_bar + self.k * self.r_bar

    def d1(self, x: np.ndarray, deriv: int = 0) -> np.ndarray:
        """Per-coordinate density factor of nu (or its derivative)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        n = self.k + 1
        half = n / 2.0
        for off, w in zip(self.offsets, self.weights):
            y = x - off
            mask = np.abs(y) < half
            if np.any(mask):
                out[mask] += w * irwin_hall(y[mask], n, deriv)
        return out

    def d1_integral(self) -> float:
        """Exact integral of D1 via the Irwin-Hall CDF (should be 1)."""
        hi = self.continuous_support
        n = self.k + 1
        return float(sum(w * (irwin_hall_cdf(np.array([hi - off]), n)[0]
                              - irwin_hall_cdf(np.array([-hi - off]), n)[0])
                         for off, w in zip(self.offsets, self.weights)))

    def sample(self, rng: np.random.Generator, n: int, d: int) -> np.ndarray:
        """Draw n points of R^d from nu (product measure)."""
        x = rng.uniform(-self.R_bar, self.R_bar, size=(n, d))
        for _ in range(self.k):
            x += rng.uniform(-self.r_bar, self.r_bar, size=(n, d))
        return x


def build_scheme(R: float, r: float, k: int) -> SmoothingScheme:
    """Weight tables by discrete convolution: uniform[-[R],[R]] * uniform[-[r],[r]]^{*k}."""
    if not (R >= r >= 0):
        raise ValueError("need R >= r >= 0")
    if k < 1:
        raise ValueError("need k >= 1")
    HR, hr = int(R), int(r)
    outer = np.ones(2 * HR + 1, dtype=object)
    inner = np.ones(2 * hr + 1, dtype=object)
    acc = outer
    for _ in range(k):
        acc = np.convolve(acc, inner)
    normalizer = (2 * HR + 1) * (2 * hr + 1) ** k
    weights = (acc / normalizer).astype(float)
    return SmoothingScheme(R=float(R), r=float(r), k=k,
                           numerators=acc, normalizer=normalizer,
                           weights=weights)


# ---------------------------------------------------------------------------
# correction densities D_j
# ---------------------------------------------------------------------------


def _even_compositions(j: int):
    """Ordered compositions of even j into even parts >= 2."""
    if j == 0:
        yield ()
        return
    for first in range(2, j + 1, 2):
        for rest in _even_compositions(j - first):
            yield (first,) + rest


def _even_multiindices(total: int, d: int):
    """Sparse even multi-indices {coord: order} with orders >= 2 summing to total."""
    def rec(remaining: int, start: int):
        if remaining == 0:
            yield {}
            return
        for c in range(start, d):
            for o in range(2, remaining + 1, 2):
                for rest in rec(remaining - o, c + 1):
                    yield {c: o, **rest}
    yield from rec(total, 0)


@lru_cache(maxsize=None)
def dj_terms(j: int, d: int, k: int) -> tuple[tuple[tuple[tuple[int, int], ...], float], ...]:
    """D_j contraction terms for a d-dim product density: pairs (alpha, coeff)
    with alpha a sparse multi-index of even derivative orders, so that
    D_j(x) = sum_terms coeff * prod_{(c,o) in alpha} D1^{(o)}(x_c) * prod_{others} D1(x_c)."""
    if j % 2 or j < 2:
        raise ValueError("j must be an even integer >= 2")
    acc: dict[tuple[tuple[int, int], ...], Fraction] = {}
    for eta in _even_compositions(j):
        m = len(eta)
        sign = Fraction((-1) ** m)
        for betas in _product_of_multiindices(eta, d):
            coeff = sign
            alpha: dict[int, int] = {}
            for beta in betas:
                for c, o in beta.items():
                    coeff *= moments_pi(k, (o,)) / math.factorial(o)
                    alpha[c] = alpha.get(c, 0) + o
            key = tuple(sorted(alpha.items()))
            acc[key] = acc.get(key, Fraction(0)) + coeff
    return tuple((key, float(v)) for key, v in sorted(acc.items()) if v != 0)


def _product_of_multiindices(eta, d):
    if not eta:
        yield ()
        return
    for head in _even_multiindices(eta[0], d):
        for tail in _product_of_multiindices(eta[1:], d):
            yield (head,) + tail


class CorrectionDensity:
    """Evaluator of D_j and of the importance ratio D_j / D for a scheme."""

    def __init__(self, scheme: SmoothingScheme, j: int, d: int):
        if j % 2 or j < 2:
            raise ValueError("correction order j must be even and >= 2")
        if j > scheme.k - 2:
            raise ValueError(f"j = {j} needs k >= {j + 2}")
        self.scheme = scheme
        self.j = j
        self.d = d
        self.terms = dj_terms(j, d, scheme.k)

    def _factor_cache(self, X: np.ndarray) -> dict[int, np.ndarray]:
        orders = sorted({o for alpha, _ in self.terms for _, o in alpha})
        cache = {0: self.scheme.d1(X, 0)}
        for o in orders:
            cache[o] = self.scheme.d1(X, o)
        return cache

    def ratio(self, X: np.ndarray) -> np.ndarray:
        """(D_j / D)(x) per row of X; rows must lie inside the support of D."""
        cache = self._factor_cache(X)
        base = cache[0]
        out = np.zeros(X.shape[0])
        for alpha, coeff in self.terms:
            term = np.full(X.shape[0], coeff)
            for c, o in alpha:
                term = term * cache[o][:, c] / base[:, c]
            out += term
        return out

    def __call__(self, X: np.ndarray) -> np.ndarray:
        """D_j(x) per row of X."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        cache = self._factor_cache(X)
        base = cache[0]
        dens = np.prod(base, axis=1)
        out = np.zeros(X.shape[0])
        for alpha, coeff in self.terms:
            term = np.full(X.shape[0], coeff)
            for c, o in alpha:
                with np.errstate(divide="ignore", invalid="ignore"):
                    term = term * np.where(base[:, c] > 0,
                                           cache[o][:, c] / base[:, c], 0.0)
            out += term
        return out * dens


def density(scheme: SmoothingScheme, X: np.ndarray) -> np.ndarray:
    """D(x) = prod_c D1(x_c) per row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.prod(scheme.d1(X, 0), axis=1)


# ---------------------------------------------------------------------------
# distribution functions
# ---------------------------------------------------------------------------


def f_mu(form: QuadraticForm, a, s: float, scheme: SmoothingScheme,
         budget: int = 10 ** 9, exact: bool = False):
    """F(s) = mu{x : Q[x - a] <= s}: exact weighted lattice sum.

    Diagonal exact forms with rational shift run on the value-lattice DP
    (`exact=True` keeps Fraction weights and returns a Fraction); other forms
    use pruned enumeration with per-point product weights.
    """
    if isinstance(a, ShiftVector):
        a = a.a
    a = np.asarray(a, dtype=float)
    d = form.dim
    Hw = scheme.half_support
    shift = _rational_shift(a) if (form.is_exact and form.is_diagonal) else None
    if shift is not None:
        m_ranges = [(-Hw, Hw)] * d
        if exact:
            # integer numerators keep the DP in (fast) bigint arithmetic;
            # one division by the normalizer at the end restores the Fraction
            wcol = np.array([int(nu) for nu in scheme.numerators], dtype=object)
        else:
            wcol = scheme.weights
        cap = s if form.is_positive else None
        dp = diagonal_value_dp(form.exact_diagonal(), shift, m_ranges,
                               cap=cap, weights=[wcol] * d, budget=budget,
                               dtype=object if exact else None)
        total = dp_count_le(dp, s)
        return (Fraction(int(total), scheme.normalizer ** d) if exact
                else float(total))
    if not form.is_positive:
        raise ValueError("enumeration path needs a positive form; "
                         "use the window variant on shells instead")
    X, _ = ellipsoid_candidates(form.matrix, a, s, budget)
    if X.shape[0] == 0:
        return Fraction(0) if exact else 0.0
    Y = X.astype(float) - a
    vals = np.einsum("ij,jk,ik->i", Y, form.matrix, Y)
    X = X[vals <= s]
    inside = np.all(np.abs(X) <= Hw, axis=1)
    X = X[inside]
    w = np.ones(X.shape[0])
    for j in range(d):
        w *= scheme.weights[X[:, j] + Hw]
    return float(np.sum(w))


def f_mu_window(form, a, window: tuple[float, float], scheme,
                budget: int = 10 ** 9) -> float:
    """F(I) = F(beta) - F(alpha) for I = (alpha, beta]."""
    alpha, beta = window
    return (f_mu(form, a, beta, scheme, budget=budget)
            - f_mu(form, a, alpha, scheme, budget=budget))


def f_mu_curve(form: QuadraticForm, a, s_list: Sequence[float],
               scheme: SmoothingScheme, budget: int = 10 ** 10) -> list[float]:
    """F(s) on an s-grid, one shared DP table (diagonal exact forms only)."""
    if isinstance(a, ShiftVector):
        a = a.a
    a = np.asarray(a, dtype=float)
    shift = _rational_shift(a) if (form.is_exact and form.is_diagonal) else None
    if shift is None:
        return [f_mu(form, a, s, scheme, budget=budget) for s in s_list]
    d = form.dim
    Hw = scheme.half_support
    cap = max(s_list) if form.is_positive else None
    dp = diagonal_value_dp(form.exact_diagonal(), shift, [(-Hw, Hw)] * d,
                           cap=cap, weights=[scheme.weights] * d,
                           budget=budget)
    return [float(dp_count_le(dp, float(s))) for s in s_list]


def _mc_over_nu(form: QuadraticForm, a: np.ndarray, s: float,
                scheme: SmoothingScheme, weight_fn, samples: int,
                seed: int, workers: int) -> McEstimate:
    d = form.dim
    mat = form.matrix
    rngs = spawn_rngs(seed, workers)
    chunks = worker_chunks(samples, workers)
    tot = tot2 = 0.0
    n_done = 0
    for rng, n in zip(rngs, chunks):
        X = scheme.sample(rng, n, d)
        Y = X - a
        ind = np.einsum("ij,jk,ik->i", Y, mat, Y) <= s
        vals = np.zeros(n)
        if np.any(ind):
            vals[ind] = weight_fn(X[ind])
        tot += float(vals.sum())
        tot2 += float((vals * vals).sum())
        n_done += n
    mean = tot / n_done
    var = max(tot2 / n_done - mean * mean, 0.0)
    return McEstimate(mean=mean, stderr=math.sqrt(var / n_done),
                      samples=n_done, seed=seed)


def f_nu(form: QuadraticForm, a, s: float, scheme: SmoothingScheme,
         samples: int = DEFAULT_MC_SAMPLES, seed: int = 0,
         workers: int = 1) -> McEstimate:
    """F0(s) = nu{x : Q[x - a] <= s}, Monte Carlo with nu itself as sampler."""
    if isinstance(a, ShiftVector):
        a = a.a
    a = np.asarray(a, dtype=float)
    return _mc_over_nu(form, a, s, scheme, lambda X: np.ones(X.shape[0]),
                       samples, seed, workers)


def f_j(form: QuadraticForm, a, s: float, scheme: SmoothingScheme, j: int,
        samples: int = DEFAULT_MC_SAMPLES, seed: int = 0,
        workers: int = 1) -> McEstimate:
    """F_j(s) = integral of the indicator against the signed density D_j,
    importance-sampled from nu: E_nu[ I{Q[X-a] <= s} (D_j/D)(X) ]."""
    if j % 2 or j < 2:
        raise ValueError("j must be even and >= 2")
    if j > scheme.k - 2:
        raise ValueError(f"j = {j} needs k >= {j + 2}")
    if isinstance(a, ShiftVector):
        a = a.a
    a = np.asarray(a, dtype=float)
    corr = CorrectionDensity(scheme, j, form.dim)
    return _mc_over_nu(form, a, s, scheme, corr.ratio, samples, seed, workers)


def expansion_residual(form: QuadraticForm, a, s_grid: Sequence[float],
                       scheme: SmoothingScheme, p: int,
                       samples: int = DEFAULT_MC_SAMPLES, seed: int = 0,
                       workers: int = 1, T: float = 4.0,
                       eps: float = 0.05, budget: int = 10 ** 9) -> dict:
    """Residual R = F - F0 - sum_{j even < p} F_j on an s-grid, with the
    theoretical envelope evaluated at constant 1 and a fitted constant."""
    d = form.dim
    if d < 9:
        raise ValueError("need d >= 9")
    if not 2 <= p < d / 2:
        raise ValueError("need 2 <= p < d/2")
    if scheme.k < 2 * p + 2:
        raise ValueError("need k >= 2p + 2")
    if not scheme.r <= scheme.R:
        raise ValueError("need r <= R")
    if isinstance(a, ShiftVector):
        a = a.a
    a = np.asarray(a, dtype=float)
    r = scheme.r
    q = form.q
    gam = gamma_estimate(form, max(r * r, 1.0 + 1e-9), T).gamma
    a_norm = float(np.linalg.norm(a))
    envelope = (q ** (d / 2) / (r * r * T)
                + (scheme.R ** p / r ** (2 * p)) * (1 + a_norm / r) ** p
                * q ** (p + d / 2)
                + gam ** (1 - 8 / d - eps) * T ** eps * q ** (d / 2) / (r * r))
    js = [j for j in range(2, p, 2)]
    rows = []
    for i, s in enumerate(s_grid):
        F = f_mu(form, a, s, scheme, budget=budget)
        F0 = f_nu(form, a, s, scheme, samples=samples, seed=seed + 1000 + i,
                  workers=workers)
        fjs = [f_j(form, a, s, scheme, j, samples=samples,
                   seed=seed + 2000 + 100 * j + i, workers=workers) for j in js]
        resid = F - F0.mean - sum(e.mean for e in fjs)
        stderr = math.sqrt(F0.stderr ** 2 + sum(e.stderr ** 2 for e in fjs))
        rows.append({"s": s, "F": F, "F0": F0, "F_j": fjs,
                     "residual": resid, "residual_stderr": stderr})
    max_resid = max(abs(row["residual"]) for row in rows)
    return {"rows": rows, "envelope": envelope, "gamma": gam,
            "fitted_constant": max_resid / envelope if envelope > 0 else math.inf}


# ---------------------------------------------------------------------------
# Fourier inversion
# ---------------------------------------------------------------------------


def fhat_mu(form: QuadraticForm, a, ts: np.ndarray,
            scheme: SmoothingScheme) -> np.ndarray:
    """Fourier-Stieltjes transform of F: product of per-coordinate weighted sums
    (diagonal forms)."""
    if not form.is_diagonal:
        raise ValueError("factorized transform needs a diagonal form")
    a = np.asarray(a, dtype=float)
    qdiag = np.diagonal(form.matrix)
    m = scheme.offsets.astype(float)
    out = np.ones(len(ts), dtype=complex)
    for qj, aj in zip(qdiag, a):
        phase = np.outer(ts * qj, (m - aj) ** 2)
        out *= np.exp(1j * phase) @ scheme.weights
    return out


def _mu_mean_value(form: QuadraticForm, a: np.ndarray,
                   scheme: SmoothingScheme) -> float:
    """E_mu[Q[X - a]] for diagonal forms; the t -> 0 limit of the inversion
    integrand is this minus s."""
    qdiag = np.diagonal(form.matrix)
    m = scheme.offsets.astype(float)
    w = scheme.weights
    return float(sum(qj * np.dot(w, (m - aj) ** 2)
                     for qj, aj in zip(qdiag, a)))


def fourier_inversion_check(form: QuadraticForm, a, s: float,
                            scheme: SmoothingScheme, T: float,
                            t_nodes: int = 2 ** 14,
                            budget: int = 10 ** 9) -> dict:
    """Reconstruct F(s) from the principal-value inversion integral on [-T, T]
    and compare against the exact weighted sum; the remainder is bounded by
    (1/T) int |Fhat|."""
    a = np.asarray(a, dtype=float)
    ts = np.linspace(0.0, T, t_nodes + 1)
    fh = fhat_mu(form, a, ts, scheme)

    integrand = np.empty_like(ts)
    z = np.exp(-1j * s * ts[1:]) * fh[1:]
    integrand[1:] = z.imag / ts[1:]
    integrand[0] = _mu_mean_value(form, a, scheme) - s  # limit at t -> 0

    dt = ts[1] - ts[0]
    trap = np.full(t_nodes + 1, dt)
    trap[0] = trap[-1] = dt / 2
    reconstructed = 0.5 - float(np.dot(trap, integrand)) / math.pi
    remainder_bound = 2.0 / T * float(np.dot(trap, np.abs(fh)))

    # quadrature tolerance: compare against the half-resolution grid
    coarse = integrand[::2]
    trap_c = np.full(len(coarse), 2 * dt)
    trap_c[0] = trap_c[-1] = dt
    rec_coarse = 0.5 - float(np.dot(trap_c, coarse)) / math.pi
    quad_tol = abs(reconstructed - rec_coarse) + 1e-12

    exact = f_mu(form, a, s, scheme, budget=budget)
    err = abs(reconstructed - exact)
    return {
        "reconstructed": reconstructed,
        "exact": float(exact),
        "error": err,
        "remainder_bound": remainder_bound,
        "quadrature_tolerance": quad_tol,
        "within_bound": err <= remainder_bound + quad_tol,
        "fhat0": complex(fh[0]),
    }
