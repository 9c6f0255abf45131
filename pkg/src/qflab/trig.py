"""Normalized trigonometric sums of quadratic forms and their diagnostics.

The triple sum over a box collapses to a single weighted sum by per-coordinate
self-convolution of the uniform box weight; for diagonal forms the phase then
splits per coordinate, the modulus of the product is the product of moduli,
and the shift supremum reduces to one period per coordinate.  Those two
identities carry all the heavy evaluations here.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceededError
from .forms import QuadraticForm
from .util import golden_max, spawn_rngs, worker_chunks

DEFAULT_T_NODES = 2 ** 16
TOP_CANDIDATES = 8


@dataclass(frozen=True)
class WeightTable:
    """Weights of the `fold`-fold self-convolution of uniform{-n..n}."""

    n: int
    fold: int
    numerators: np.ndarray   # object dtype ints, index m + fold*n
    weights: np.ndarray      # floats summing to 1

    @property
    def half_support(self) -> int:
        return self.fold * self.n

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.half_support, self.half_support + 1)

    def denominator(self) -> int:
        return (2 * self.n + 1) ** self.fold


def convolve_weights(n: int, fold: int) -> WeightTable:
    """Exact integer convolution counts, normalized to floats."""
    if n < 0 or fold < 1:
        raise ValueError("need n >= 0 and fold >= 1")
    base = np.ones(2 * n + 1, dtype=object)
    acc = base
    for _ in range(fold - 1):
        acc = np.convolve(acc, base)
    den = (2 * n + 1) ** fold
    weights = (acc / den).astype(float)
    return WeightTable(n=n, fold=fold, numerators=acc, weights=weights)


def _diag_entries(form: QuadraticForm) -> np.ndarray:
    if not form.is_diagonal:
        raise ValueError("factorized mode requires a diagonal form")
    return np.diagonal(form.matrix).copy()


def _phi_factorized(qdiag: np.ndarray, a: np.ndarray, t: float,
                    table: WeightTable) -> float:
    m = table.offsets.astype(float)
    out = 1.0
    for qj, aj in zip(qdiag, a):
        z = np.exp(1j * t * qj * (m - aj) ** 2)
        out *= abs(np.dot(table.weights, z))
    return out


def phi_factorized_batch(qdiag: np.ndarray, a: np.ndarray, ts: np.ndarray,
                         table: WeightTable) -> np.ndarray:
    """phi_a(t; s) on an array of t values, diagonal forms only."""
    m = table.offsets.astype(float)
    out = np.ones(len(ts))
    for qj, aj in zip(qdiag, a):
        phase = np.outer(ts * qj, (m - aj) ** 2)
        out *= np.abs(np.exp(1j * phase) @ table.weights)
    return out


def phi(form: QuadraticForm, a, t: float, s: float, mode: str = "auto",
        budget: int = 10 ** 7, samples: int = 10 ** 5, seed: int = 0,
        workers: int = 1):
    """phi_a(t; s): normalized modulus of the smoothed trigonometric sum.

    Modes: "factorized" (diagonal forms, exact), "direct" (any form, box
    budgeted by (6n+1)^d), "mc" (any form, returns (value, stderr)).
    "auto" picks factorized for diagonal forms, else direct if affordable,
    else mc.
    """
    a = np.asarray(a, dtype=float)
    n = int(math.isqrt(int(s))) if s >= 1 else 0
    table = convolve_weights(n, 3)
    d = form.dim
    if mode == "auto":
        if form.is_diagonal:
            mode = "factorized"
        elif (6 * n + 1) ** d <= budget:
            mode = "direct"
        else:
            mode = "mc"
    if mode == "factorized":
        return _phi_factorized(_diag_entries(form), a, t, table)
    if mode == "direct":
        total = (6 * n + 1) ** d
        if total > budget:
            raise BudgetExceededError(
                f"direct phi needs {total} points, budget {budget}",
                required=total)
        return _weighted_modulus_direct(form.matrix, a, t, table)
    if mode == "mc":
        return _phi_mc(form.matrix, a, t, table, samples, seed, workers)
    raise ValueError(f"unknown mode {mode!r}")


def _weighted_modulus_direct(mat: np.ndarray, a: np.ndarray, t: float,
                             table: WeightTable) -> float:
    d = mat.shape[0]
    offs = table.offsets
    grids = np.meshgrid(*([offs] * d), indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1).astype(float)
    w = table.weights
    wprod = np.ones(X.shape[0])
    for j in range(d):
        wprod *= w[(X[:, j] + table.half_support).astype(int)]
    Y = X - a
    vals = np.einsum("ij,jk,ik->i", Y, mat, Y)
    return abs(np.sum(wprod * np.exp(1j * t * vals)))


def _phi_mc(mat, a, t, table: WeightTable, samples, seed, workers):
    d = mat.shape[0]
    n = table.n
    rngs = spawn_rngs(seed, workers)
    chunks = worker_chunks(samples, workers)
    acc = 0j
    acc_re2 = acc_im2 = 0.0
    total = 0
    for rng, cnt in zip(rngs, chunks):
        y = rng.integers(-n, n + 1, size=(cnt, d, table.fold)).sum(axis=2)
        Y = y.astype(float) - a
        vals = np.einsum("ij,jk,ik->i", Y, mat, Y)
        z = np.exp(1j * t * vals)
        acc += np.sum(z)
        acc_re2 += float(np.sum(z.real ** 2))
        acc_im2 += float(np.sum(z.imag ** 2))
        total += cnt
    mean = acc / total
    var = (acc_re2 / total - mean.real ** 2) + (acc_im2 / total - mean.imag ** 2)
    stderr = math.sqrt(max(var, 0.0) / total)
    # modulus of the complex mean; bias is O(stderr^2)
    return abs(mean), stderr


def f_sum(form: QuadraticForm, a, t: float, r: float, k: int,
          mode: str = "auto", budget: int = 10 ** 7) -> float:
    """|sum_x w(x) e{t (Q[x] + <a, x>)}| with (2k+1)-fold convolution weights.

    Here `a` is the linear coefficient of the polynomial phase, not a center
    shift.
    """
    a = np.asarray(a, dtype=float)
    n = int(r)
    table = convolve_weights(n, 2 * k + 1)
    if mode == "auto":
        mode = "factorized" if form.is_diagonal else "direct"
    m = table.offsets.astype(float)
    if mode == "factorized":
        qdiag = _diag_entries(form)
        out = 1.0
        for qj, aj in zip(qdiag, a):
            z = np.exp(1j * t * (qj * m * m + aj * m))
            out *= abs(np.dot(table.weights, z))
        return out
    d = form.dim
    total = len(m) ** d
    if total > budget:
        raise BudgetExceededError(f"direct f needs {total} points", required=total)
    grids = np.meshgrid(*([m] * d), indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1)
    w = table.weights
    wprod = np.ones(X.shape[0])
    for j in range(d):
        wprod *= w[(X[:, j] + table.half_support).astype(int)]
    vals = np.einsum("ij,jk,ik->i", X, form.matrix, X) + X @ a
    return abs(np.sum(wprod * np.exp(1j * t * vals)))


# ---------------------------------------------------------------------------
# symmetrized sum (bilinear phase)
# ---------------------------------------------------------------------------


def _dirichlet_ratio(z: np.ndarray, n: int, dtype=float) -> np.ndarray:
    """D_n(z) / (2n+1) with the removable singularities at z = 2 pi k filled.

    Clipped to [-1, 1], which is exact for the true ratio; near-singular
    arguments otherwise amplify sine roundoff above 1.  Extended precision
    (dtype=np.longdouble) pushes the argument-rounding noise floor near
    resonances from ~1e-9 down to ~1e-13, which the peak refinements need.
    """
    z = np.asarray(z, dtype=dtype)
    half = z / dtype(2)
    s = np.sin(half)
    num = np.sin((2 * n + 1) * half)
    small = np.abs(s) < 1e-9
    out = np.empty_like(z)
    safe = ~small
    out[safe] = num[safe] / s[safe] / (2 * n + 1)
    if np.any(small):
        out[small] = np.cos((2 * n + 1) * half[small]) / np.cos(half[small])
    return np.clip(out, -1.0, 1.0)


def phi_symmetrized_batch(form: QuadraticForm, ts: np.ndarray, r: float,
                          k: int = 1) -> np.ndarray:
    """phi_sym on an array of t values (diagonal forms), chunked for memory."""
    n = int(r)
    tri = convolve_weights(n, 2)
    u = tri.offsets.astype(float)
    wu = tri.weights
    qdiag = _diag_entries(form)
    ts = np.asarray(ts, dtype=float)
    out = np.ones(len(ts))
    chunk = max(1, (2 ** 22) // max(len(u), 1))
    for start in range(0, len(ts), chunk):
        tt = ts[start:start + chunk]
        block = np.ones(len(tt))
        for qj in qdiag:
            Z = 2.0 * qj * np.outer(tt, u)
            block *= _dirichlet_ratio(Z, n) ** (2 * k) @ wu
        out[start:start + chunk] = block
    return out


def phi_symmetrized(form: QuadraticForm, t: float, r: float, k: int = 1,
                    budget: int = 10 ** 7) -> float:
    """The symmetrized bilinear sum phi(t; r) over e{2t <Qx, y>}.

    The inner y-sum is a product of squared Dirichlet-kernel powers for any
    form; for diagonal forms the outer x-sum also splits per coordinate.
    Always real and in [0, 1], with value 1 at t = 0.
    """
    n = int(r)
    tri = convolve_weights(n, 2)          # symmetrization of the uniform weight
    u = tri.offsets.astype(np.longdouble)
    wu = tri.weights.astype(np.longdouble)
    if form.is_diagonal:
        qdiag = _diag_entries(form)
        out = np.longdouble(1.0)
        for qj in qdiag:
            g = _dirichlet_ratio(np.longdouble(2.0) * np.longdouble(t)
                                 * np.longdouble(qj) * u, n,
                                 dtype=np.longdouble) ** (2 * k)
            out *= np.dot(wu, g)
        return float(out)
    d = form.dim
    total = len(u) ** d
    if total > budget:
        raise BudgetExceededError(
            f"direct symmetrized phi needs {total} points", required=total)
    grids = np.meshgrid(*([u] * d), indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1)
    wprod = np.ones(X.shape[0])
    for j in range(d):
        wprod *= wu[(X[:, j] + tri.half_support).astype(int)]
    Z = X @ form.matrix.T
    g = np.ones(X.shape[0])
    for j in range(d):
        g *= _dirichlet_ratio(2.0 * t * Z[:, j], n) ** (2 * k)
    return float(np.sum(wprod * g))


# ---------------------------------------------------------------------------
# profiles, gamma, rho
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrigProfile:
    s: float
    t: np.ndarray
    values: np.ndarray
    mode: str                 # "factorized" | "direct" | "monte-carlo"
    a_mode: str               # "sup" | "fixed"
    a_desc: str
    stderr: Optional[np.ndarray] = None
    form_desc: str = ""


def default_t_grid(s: float, T: float, t_res: Optional[float] = None) -> np.ndarray:
    t0 = 1.0 / math.sqrt(s)
    if T < t0:
        raise ValueError("need T >= s^(-1/2)")
    if t_res is None:
        t_res = min(1.0 / (4.0 * s), (T - t0) / DEFAULT_T_NODES)
    if t_res <= 0:
        return np.array([t0])
    npts = int(math.floor((T - t0) / t_res)) + 1
    grid = t0 + t_res * np.arange(npts)
    if grid[-1] < T - 1e-15:
        grid = np.append(grid, T)
    return grid


def phi_profile(form: QuadraticForm, a, s: float, T: float,
                t_res: Optional[float] = None) -> TrigProfile:
    """Fixed-shift profile of phi_a(t; s) on [s^{-1/2}, T] (diagonal forms)."""
    qdiag = _diag_entries(form)
    a = np.asarray(a, dtype=float)
    table = convolve_weights(int(math.isqrt(int(s))), 3)
    ts = default_t_grid(s, T, t_res)
    vals = phi_factorized_batch(qdiag, a, ts, table)
    return TrigProfile(s=s, t=ts, values=vals, mode="factorized",
                       a_mode="fixed", a_desc=f"a={a.tolist()}",
                       form_desc=repr(form))


def _sup_factor_coordinate(qj: float, ts: np.ndarray, table: WeightTable,
                           a_res: int) -> np.ndarray:
    """sup over the shift coordinate of |sum_m w(m) e{i t q (m-a)^2}| per t.

    In the modulus the a^2 phase cancels, leaving frequencies -2 t q m; the
    factor is periodic in a with period pi/(t q), so a equals alpha * period
    with alpha on a unit grid, which makes the phase matrix independent of t.
    """
    m = table.offsets.astype(float)
    alphas = np.arange(a_res) / a_res
    F = np.exp(-2j * math.pi * np.outer(alphas, m))          # (A, M)
    out = np.empty(len(ts))
    chunk = max(1, (2 ** 22) // (len(m) * a_res))
    for k in range(0, len(ts), chunk):
        tt = ts[k:k + chunk]
        V = table.weights[:, None] * np.exp(1j * np.outer(m * m, tt * qj))
        out[k:k + chunk] = np.max(np.abs(F @ V), axis=0)
    return out


def _sup_factor_scalar(qj: float, t: float, table: WeightTable,
                       a_res: int, rounds: int = 2) -> tuple[float, float]:
    """Refined sup over one shift coordinate at scalar t; returns (a*, value)."""
    m = table.offsets.astype(float)
    base = table.weights * np.exp(1j * t * qj * m * m)

    def val(alpha: float) -> float:
        return abs(np.dot(base, np.exp(-2j * math.pi * alpha * m)))

    alphas = np.arange(a_res) / a_res
    vals = np.abs(np.exp(-2j * math.pi * np.outer(alphas, m)) @ base)
    best = int(np.argmax(vals))
    lo = (best - 1) / a_res
    hi = (best + 1) / a_res
    astar, v = golden_max(val, lo, hi, iters=48)
    period = math.pi / (t * qj)
    return astar * period, v


def sup_phi_profile(form: QuadraticForm, s: float, T: float,
                    t_res: Optional[float] = None,
                    a_res: int = 96) -> TrigProfile:
    """Grid profile of sup_a phi_a(t; s) for diagonal forms (exact per-coordinate
    reduction of the shift supremum to one period)."""
    qdiag = _diag_entries(form)
    table = convolve_weights(int(math.isqrt(int(s))), 3)
    ts = default_t_grid(s, T, t_res)
    vals = np.ones(len(ts))
    for qj in qdiag:
        vals *= _sup_factor_coordinate(qj, ts, table, a_res)
    return TrigProfile(s=s, t=ts, values=vals, mode="factorized",
                       a_mode="sup",
                       a_desc=f"per-coordinate grid {a_res} + period reduction",
                       form_desc=repr(form))


@dataclass(frozen=True)
class GammaResult:
    gamma: float
    t_star: float
    a_star: np.ndarray
    profile: TrigProfile


def gamma_estimate(form: QuadraticForm, s: float, T: float,
                   t_res: Optional[float] = None, a_res: int = 96,
                   refine_rounds: int = 3, top_k: int = TOP_CANDIDATES,
                   mc_budget: Optional[int] = None,
                   samples: int = 20000, seed: int = 0) -> GammaResult:
    """gamma(s, T) = sup_a sup_{s^{-1/2} <= t <= T} phi_a(t; s).

    Diagonal forms: grid maximum with golden refinement of t around the top
    grid candidates; the shift supremum factorizes and is exact up to its own
    refined 1-d search.  Non-diagonal forms need `mc_budget` and get a coarse
    heuristic sup over an a-grid in [0, 1)^d (a lower bound on gamma, flagged
    as such in the profile).
    """
    if not form.is_diagonal:
        if mc_budget is None:
            raise ValueError("non-diagonal form needs mc_budget for the "
                             "heuristic sup path")
        return _gamma_heuristic(form, s, T, a_res, mc_budget, samples, seed)
    qdiag = _diag_entries(form)
    table = convolve_weights(int(math.isqrt(int(s))), 3)
    profile = sup_phi_profile(form, s, T, t_res=t_res, a_res=a_res)
    ts, vals = profile.t, profile.values

    def sup_at(t: float) -> float:
        out = 1.0
        for qj in qdiag:
            out *= _sup_factor_scalar(qj, t, table, a_res)[1]
        return out

    order = np.argsort(vals)[::-1][:top_k]
    best_t = float(ts[order[0]])
    best_v = float(vals[order[0]])
    dt = ts[1] - ts[0] if len(ts) > 1 else 1e-3
    for idx in order:
        lo = max(float(ts[idx]) - dt, ts[0])
        hi = min(float(ts[idx]) + dt, ts[-1])
        for _ in range(refine_rounds - 1):
            tc, vc = golden_max(sup_at, lo, hi, iters=40)
            lo, hi = tc - (hi - lo) * 0.05, tc + (hi - lo) * 0.05
        tc, vc = golden_max(sup_at, lo, hi, iters=40)
        if vc > best_v:
            best_t, best_v = tc, vc
    a_star = np.array([_sup_factor_scalar(qj, best_t, table, a_res)[0]
                       for qj in qdiag])
    # lexicographic tie-break on t keeps the reduction deterministic
    return GammaResult(gamma=min(best_v, 1.0), t_star=best_t, a_star=a_star,
                       profile=profile)


def _gamma_heuristic(form: QuadraticForm, s: float, T: float, a_res: int,
                     budget: int, samples: int, seed: int) -> GammaResult:
    d = form.dim
    n = int(math.isqrt(int(s)))
    direct_cost = (6 * n + 1) ** d
    # coarse grids sized to the budget; each (t, a) cell costs one phi call
    n_a = max(min(a_res, 8), 2)
    per_call = min(direct_cost, samples)
    n_t = max(int(budget // (per_call * n_a ** d)), 8)
    ts = default_t_grid(s, T, t_res=(T - 1 / math.sqrt(s)) / n_t)
    a_axes = [np.arange(n_a) / n_a] * d
    best = (-1.0, ts[0], np.zeros(d))
    vals = np.zeros(len(ts))
    for ai in np.ndindex(*([n_a] * d)):
        a = np.array([a_axes[j][ai[j]] for j in range(d)])
        for i, t in enumerate(ts):
            if direct_cost <= samples:
                v = phi(form, a, float(t), s, mode="direct",
                        budget=direct_cost)
            else:
                v, _ = phi(form, a, float(t), s, mode="mc", samples=samples,
                           seed=seed)
            vals[i] = max(vals[i], v)
            if v > best[0]:
                best = (v, float(t), a.copy())
    profile = TrigProfile(s=s, t=ts, values=vals, mode="direct"
                          if direct_cost <= samples else "monte-carlo",
                          a_mode="sup",
                          a_desc=f"heuristic sup: {n_a}^{d} grid on [0,1)^d",
                          form_desc=repr(form))
    return GammaResult(gamma=min(best[0], 1.0), t_star=best[1],
                       a_star=best[2], profile=profile)


def mm(t: float, s: float) -> float:
    """M(t; s) = (|t| s)^{-1} for |t| <= s^{-1/2}, |t| for |t| > s^{-1/2}."""
    if s <= 0:
        raise ValueError("s must be > 0")
    if t == 0:
        raise ValueError("M(0; s) is infinite")
    at = abs(t)
    return 1.0 / (at * s) if at <= 1.0 / math.sqrt(s) else at


def rho_of_s(s: float, Ts: float, gamma: float, d: int, eps: float) -> float:
    """rho(s) = s^{1-zeta} + 1/T + gamma^{1-8/d-eps} T^eps, zeta = [ (d-1)/2 ] / 2,
    after capping T at gamma^{-(1-8/d-eps)/(2 eps)}."""
    if d < 9:
        raise ValueError("need d >= 9")
    if not 0 < eps < 1 - 8 / d:
        raise ValueError("need 0 < eps < 1 - 8/d")
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    if Ts < 1:
        raise ValueError("need T >= 1")
    zeta = ((d - 1) // 2) / 2.0
    expo = (1 - 8.0 / d - eps)
    if gamma > 0:
        cap = gamma ** (-expo / (2 * eps))
        T = min(Ts, cap)
    else:
        T = Ts
    tail = (gamma ** expo) * T ** eps if gamma > 0 else 0.0
    return s ** (1 - zeta) + 1.0 / T + tail


def _pair_ratios(qdiag, a, ts, taus, table, q, d, s):
    p_t = phi_factorized_batch(qdiag, a, ts, table)
    p_tt = phi_factorized_batch(qdiag, a, ts + taus, table)
    mvals = np.array([mm(tau, s) for tau in taus])
    env = q ** (d / 2) * mvals ** (d / 2)
    return (p_t * p_tt) / env


def check_basic_inequality(form: QuadraticForm, a, s: float,
                           n_samples: int = 10 ** 4, seed: int = 0,
                           t_range: tuple[float, float] = (0.0, 8.0),
                           tau_range: tuple[float, float] = (-8.0, 8.0),
                           probe_points: int = 512) -> dict:
    """Empirical constants in the two basic inequalities
    phi phi <= C q^{d/2} M^{d/2} and phi <= C q^{d/2} M^{d/2}.

    Random (t, tau) samples are complemented by deterministic probes: a
    log-spaced tau scan for the single ratio and shoulder pairs
    (t* - x, t* + x) around the top profile peaks, where the pair supremum
    actually lives; without them the sampled maximum is noise-driven and
    unstable between sample sets.
    """
    qdiag = _diag_entries(form)
    a = np.asarray(a, dtype=float)
    d = form.dim
    q = form.q
    table = convolve_weights(int(math.isqrt(int(s))), 3)
    rng = np.random.default_rng(seed)
    ts = rng.uniform(*t_range, size=n_samples)
    taus = rng.uniform(*tau_range, size=n_samples)
    taus[np.abs(taus) < 1e-6] = 1e-6

    r_pairs = _pair_ratios(qdiag, a, ts, taus, table, q, d, s)
    i_pairs = int(np.argmax(r_pairs))
    argmax_pair = (float(ts[i_pairs]), float(taus[i_pairs]))
    max_pairs = float(np.max(r_pairs))

    tau_hi = max(abs(tau_range[0]), abs(tau_range[1]))
    tau_scan = np.geomspace(1.0 / (8.0 * s), tau_hi, probe_points)
    p_scan = phi_factorized_batch(qdiag, a, tau_scan, table)
    env_scan = q ** (d / 2) * np.array([mm(t, s) for t in tau_scan]) ** (d / 2)
    max_single = float(np.max(p_scan / env_scan))
    # single probes double as pairs at t = 0 (phi(0) = 1)
    max_pairs = max(max_pairs, max_single)

    grid = default_t_grid(s, max(t_range[1], 1.5 / math.sqrt(s)),
                          t_res=1.0 / (4.0 * s))
    prof = phi_factorized_batch(qdiag, a, grid, table)
    peak_idx = np.argsort(prof)[::-1][:4]
    xs = np.geomspace(1.0 / (16.0 * s), 1.0, probe_points)
    for idx in peak_idx:
        t_star = float(grid[idx])
        shoulders = _pair_ratios(qdiag, a, t_star - xs, 2 * xs, table, q, d, s)
        max_pairs = max(max_pairs, float(np.max(shoulders)))
        onesided = _pair_ratios(qdiag, a, np.full_like(xs, t_star), xs,
                                table, q, d, s)
        max_pairs = max(max_pairs, float(np.max(onesided)))

    fitted = max(max_pairs, max_single)
    return {
        "max_ratio_pairs": max_pairs,
        "max_ratio_single": max_single,
        "fitted_constant": fitted,
        "argmax_pair": argmax_pair,
        "lambda_fitted": max(fitted * q ** (d / 2), 1.0),
        "samples": n_samples,
        "seed": seed,
    }


def check_lemma64(n: int, k: int, z, truncation: int = 8) -> dict:
    """Dirichlet-kernel bound: g(z) = prod_j (D_n(z_j)/(2n+1))^{2k} against the
    truncated sum of h(m) = prod_j (1 + r^2 (z_j - 2 pi m_j)^2)^{-k}."""
    z = np.asarray(z, dtype=float)
    d = len(z)
    lhs = float(np.prod(_dirichlet_ratio(z, n) ** (2 * k)))
    r = float(n)
    ms = np.arange(-truncation, truncation + 1)
    rhs = 1.0
    for zj in z:
        terms = (1.0 + r ** 2 * (zj - 2 * math.pi * ms) ** 2) ** (-k)
        rhs *= float(np.sum(terms))
    return {"lhs": lhs, "rhs": rhs,
            "ratio": lhs / rhs if rhs > 0 else math.inf}
