"""The classical Markov chain induced on the center ``c_0(1/2 Z_+)``.

Everything here is driven by the scaled convolution weights

    nu_n(r) = mu_n(r) / d_r,      phi^n = sum_r mu_n(r) phi_r,

because the n-step kernel is a banded sum of them,

    p_{phi^n}(s, t) = d_t / d_s * sum_{r in fuse(s, t)} nu_n(r),

and ``nu_{n+1}(w) = sum_r (lambda_r / d_r) sum_{s in fuse(r, w)} nu_n(s)``.
The support of ``nu_n`` is tracked exactly (it grows by ``max supp phi`` per
step), so no state-space truncation ever enters the Green function: the only
approximation is cutting the series in ``n``, which is certified by the
geometric bound ``p_{phi^n}(s,t) <= d_t dim H_s / (d_s dim H_t) lambda^n``.

Individual long-walk kernels (balayage checks, the 0-2 law) use the
unscaled weights ``mu_n`` instead, since ``nu_n`` underflows once the walk
has drifted a few thousand labels away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import brentq

from .exceptions import InputError, NumericalError, ResourceError, TransienceError, UndercertifiedError
from .fusion import (
    DeformationParams,
    WeightFunctional,
    as_q,
    check_label,
    fusion_coeff,
    is_generating,
    log_q_dims,
    q_dims,
    quantum_dim,
    weight_product,
)

__all__ = [
    "CentralElement",
    "GreenTable",
    "RenewalData",
    "MAX_ARRAY_LEN",
    "asymptotic_report",
    "balayage",
    "band_sum",
    "central_apply",
    "central_power_apply",
    "convolution_powers",
    "decay_rate",
    "green_central",
    "green_weights",
    "kernel_rows",
    "martin_central",
    "mu_powers",
    "nu_powers",
    "path_probability",
    "renewal_sequence",
    "solve_delta",
    "transition_kernel",
    "zero_two_estimate",
    "zero_two_sequence",
]

# largest label array the engine will allocate (twice-spins)
MAX_ARRAY_LEN = 2_000_000
# hard cap on the number of series terms / iterations
MAX_TERMS = 200_000


@dataclass(frozen=True)
class CentralElement:
    """Central element ``x = sum_s x(s) I_s`` known for twice-spins ``0..cutoff``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 1 or v.size == 0:
            raise InputError("CentralElement needs a nonempty 1-d array of values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def cutoff(self) -> int:
        return self.values.size - 1

    @classmethod
    def constant(cls, c: float, cutoff: int) -> "CentralElement":
        return cls(np.full(cutoff + 1, float(c)))

    @classmethod
    def indicator(cls, labels: Sequence[int], cutoff: int) -> "CentralElement":
        v = np.zeros(cutoff + 1)
        v[[check_label(n) for n in labels if n <= cutoff]] = 1.0
        return cls(v)

    def __getitem__(self, n: int) -> float:
        return float(self.values[n])


@dataclass(frozen=True)
class GreenTable:
    """Partial sums of ``g_phi(s, t)`` with per-row certified tails.

    ``values[i]`` approximates ``g_phi(s2[i]/2, target/2)`` from below and the
    true value lies in ``[values[i], values[i] + tail_bounds[i]]``.
    """

    phi: WeightFunctional
    target: int
    s2: np.ndarray
    values: np.ndarray
    tail_bounds: np.ndarray
    n_terms: int
    decay: float

    def rows(self) -> Iterator[tuple[int, float, float]]:
        for s, v, b in zip(self.s2, self.values, self.tail_bounds):
            yield int(s), float(v), float(b)

    def __len__(self):
        return self.s2.size


@dataclass(frozen=True)
class RenewalData:
    """Exponential tilt ``delta_phi`` and drift ``lambda_phi`` of the walk on Z."""

    delta: float
    lambda_phi: float
    p: dict


# ---------------------------------------------------------------------------
# one-step kernel and convolution powers


def transition_kernel(phi: WeightFunctional, s: int, t: int, q) -> float:
    """``p_phi(s, t) = sum_r lambda_r d_t / (d_r d_s) N^t_{r,s}``."""
    q = as_q(q)
    s, t = check_label(s), check_label(t)
    ds, dt = quantum_dim(s, q), quantum_dim(t, q)
    return sum(lam * dt / (quantum_dim(r, q) * ds) for r, lam in phi.weights.items() if fusion_coeff(r, s, t))


def convolution_powers(phi: WeightFunctional, n_max: int, q) -> list[WeightFunctional]:
    """``[phi^0, phi^1, ..., phi^n_max]`` by repeated fusion-ring products."""
    if n_max < 0:
        raise InputError("n_max must be >= 0")
    out = [WeightFunctional.state(0)]
    for _ in range(n_max):
        out.append(weight_product(out[-1], phi, q))
    return out


def path_probability(phi: WeightFunctional, trajectory: Sequence[int], q) -> float:
    """Cylinder probability ``p(0, s_1) p(s_1, s_2) ...`` of a trajectory from 0."""
    if len(trajectory) == 0:
        raise InputError("trajectory must be nonempty")
    prob, prev = 1.0, 0
    for s in trajectory:
        prob *= transition_kernel(phi, prev, s, q)
        if prob == 0.0:
            return 0.0
        prev = s
    return prob


def decay_rate(phi: WeightFunctional, q) -> float:
    """``lambda = sum_r lambda_r dim H_r / d_r`` from the geometric transience bound."""
    q = as_q(q)
    return math.fsum(lam * (r + 1) / quantum_dim(r, q) for r, lam in phi.weights.items())


def band_sum(v: np.ndarray, r: int, out_len: int) -> np.ndarray:
    """``u(w) = sum_{s in fuse(r, w)} v(s)`` for ``w < out_len``; ``v`` is zero past its end.

    Only positive-term additions are used, so relative accuracy is kept even
    when ``v`` spans many orders of magnitude.
    """
    pad = np.zeros(out_len + r + 1)
    m = min(v.size, pad.size)
    pad[:m] = v[:m]
    u = np.zeros(out_len)
    # w >= r: s = w - r + 2k, k = 0..r
    if out_len > r:
        for k in range(r + 1):
            u[r:] += pad[2 * k : 2 * k + out_len - r]
    # w < r: s = r - w + 2k, k = 0..w
    for w in range(min(r, out_len)):
        u[w] = pad[r - w : r + w + 1 : 2].sum()
    return u


def _phi_arrays(phi: WeightFunctional, q: float) -> list[tuple[int, float]]:
    return [(r, lam / quantum_dim(r, q)) for r, lam in phi.weights.items()]


def nu_powers(phi: WeightFunctional, q) -> Iterator[np.ndarray]:
    """Yield ``nu_0, nu_1, ...`` with ``nu_n`` of length ``n * max supp phi + 1``."""
    q = as_q(q)
    coeffs = _phi_arrays(phi, q)
    R = phi.max_label
    nu = np.array([1.0])
    n = 0
    while True:
        yield nu
        n += 1
        length = n * R + 1
        if length > MAX_ARRAY_LEN:
            raise ResourceError(f"convolution power {n} would need {length} labels")
        new = np.zeros(length)
        for r, c in coeffs:
            new += c * band_sum(nu, r, length)
        nu = new


def mu_powers(phi: WeightFunctional, q) -> Iterator[np.ndarray]:
    """Yield the weights ``mu_0, mu_1, ...`` of ``phi^n = sum_r mu_n(r) phi_r``.

    The recursion ``mu_{n+1}(w) = sum_r lambda_r sum_{s in fuse(r,w)} d_w/(d_r d_s) mu_n(s)``
    has coefficients at most 1, evaluated in log space, so unlike ``nu_n``
    these weights neither underflow nor overflow for long walks.
    """
    q = as_q(q)
    R = phi.max_label
    mu = np.array([1.0])
    n = 0
    while True:
        yield mu
        n += 1
        length = n * R + 1
        if length > MAX_ARRAY_LEN:
            raise ResourceError(f"convolution power {n} would need {length} labels")
        logd = log_q_dims(length - 1, q)
        w = np.arange(length)
        new = np.zeros(length)
        for r, lam in phi.weights.items():
            for j in range(-r, r + 1, 2):
                s_ = w + j
                ok = (s_ >= np.abs(r - w)) & (s_ < mu.size)
                new[ok] += lam * mu[s_[ok]] * np.exp(logd[w[ok]] - logd[r] - logd[s_[ok]])
        mu = new


def kernel_rows(mu: np.ndarray, s_max: int, t_max: int, q) -> np.ndarray:
    """Matrix ``p_{phi^n}(s, t)`` for ``s <= s_max``, ``t <= t_max`` from the weights ``mu_n``.

    Row recursion ``p(s,t) = (d_t d_{s-1})/(d_s d_{t-1}) p(s-1,t-1) + mu(s+t) d_t/(d_s d_{s+t})``
    with ``p(0,t) = mu(t)`` and ``p(s,0) = mu(s)/d_s^2``; every ratio is formed
    in log space and every term is nonnegative.
    """
    q = as_q(q)
    L = s_max + t_max + 1
    m = np.zeros(L)
    k = min(np.size(mu), L)
    m[:k] = np.asarray(mu, dtype=float)[:k]
    logd = log_q_dims(L - 1, q)
    lt = logd[1 : t_max + 1]
    P = np.empty((s_max + 1, t_max + 1))
    P[0] = m[: t_max + 1]
    for s in range(1, s_max + 1):
        P[s, 0] = m[s] * math.exp(-2.0 * logd[s])
        shift = np.exp(lt + logd[s - 1] - logd[s] - logd[:t_max])
        fresh = m[s + 1 : s + t_max + 1] * np.exp(lt - logd[s] - logd[s + 1 : s + t_max + 1])
        P[s, 1:] = shift * P[s - 1, :-1] + fresh
    return P


# ---------------------------------------------------------------------------
# Green function


def _tail_factor(s2: np.ndarray, t: int, q: float) -> np.ndarray:
    d = q_dims(int(max(s2.max(), t)), q)
    return d[t] * (s2 + 1) / (d[s2] * (t + 1))


def _check_transient(phi: WeightFunctional, q: float) -> float:
    if phi.norm > 1.0 + 1e-12:
        raise InputError(f"weight functional has norm {phi.norm} > 1")
    lam = decay_rate(phi, q)
    if not lam < 1.0:
        raise TransienceError(
            f"transience not certified: decay rate {lam} >= 1 (geometric bound needs a label of nonzero spin)"
        )
    return lam


def green_weights(phi: WeightFunctional, r_max: int, params: DeformationParams, factor: float = 1.0,
                  rel_tail: float | None = None, rel_of=None) -> tuple[np.ndarray, int, float]:
    """Partial sums ``gamma_N(r) = sum_{n<=N} nu_n(r)`` for ``r <= r_max``.

    ``N`` is the smallest count with ``factor * lambda^(N+1)/(1-lambda) <= tol_tail``.
    When ``rel_tail`` is given the summation continues until
    ``rel_of(gamma, tail) <= rel_tail`` as well.  Returns ``(gamma, N, lambda)``.
    """
    q = params.q
    lam = _check_transient(phi, q)
    tol = params.tol_tail
    if lam == 0.0:
        n_abs = 0
    else:
        n_abs = max(0, math.ceil(math.log(tol * (1.0 - lam) / factor) / math.log(lam)) - 1)
    gamma = np.zeros(r_max + 1)
    n = -1
    for n, nu in enumerate(nu_powers(phi, q)):
        m = min(nu.size, r_max + 1)
        gamma[:m] += nu[:m]
        if n >= n_abs:
            if rel_tail is None:
                break
            tail = lam ** (n + 1) / (1.0 - lam)
            if rel_of(gamma, tail) <= rel_tail:
                break
        if n >= MAX_TERMS:
            raise NumericalError(f"green series did not reach its tolerance within {MAX_TERMS} terms")
    return gamma, n, lam


def green_central(phi: WeightFunctional, t: int, s_max: int, params: DeformationParams,
                  rel_tail: float | None = None) -> GreenTable:
    """Certified ``g_phi(s, t)`` for twice-spins ``s <= s_max``.

    The series is cut at the first ``N`` where the geometric tail is below
    ``params.tol_tail`` for every reported row; with ``rel_tail`` it continues
    until each tail is also below ``rel_tail`` times its partial sum.
    """
    q = params.q
    t, s_max = check_label(t), check_label(s_max)
    if s_max + t + 1 > MAX_ARRAY_LEN:
        raise ResourceError(f"s_max={s_max} exceeds the label budget")
    s2 = np.arange(s_max + 1)
    F = _tail_factor(s2, t, q)
    d = q_dims(s_max + t, q)

    def values_from(gamma):
        # g(s,t) = d_t/d_s sum_{r in fuse(s,t)} gamma(r)
        return band_sum(gamma, t, s_max + 1) * d[t] / d[: s_max + 1]

    def rel_of(gamma, tail):
        vals = values_from(gamma)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(vals > 0, F * tail / vals, np.where(F * tail > 0, np.inf, 0.0))
        return float(ratio.max())

    gamma, N, lam = green_weights(phi, s_max + t, params, factor=float(F.max()), rel_tail=rel_tail,
                                  rel_of=rel_of)
    values = values_from(gamma)
    tails = F * lam ** (N + 1) / (1.0 - lam)
    return GreenTable(phi, t, s2, values, tails, N, lam)


# ---------------------------------------------------------------------------
# renewal quantities


def renewal_sequence(phi: WeightFunctional, q) -> dict[int, float]:
    """``p(n) = phi(e_n) = sum_{2s >= |n|, 2s = n mod 2} lambda_s q^n / d_s``."""
    q = as_q(q)
    out: dict[int, float] = {}
    for s2, lam in phi.weights.items():
        ds = quantum_dim(s2, q)
        for n in range(-s2, s2 + 1, 2):
            out[n] = out.get(n, 0.0) + lam * q**n / ds
    return dict(sorted(out.items()))


def _tilted_mass(phi: WeightFunctional, q: float, delta: float) -> float:
    # f(delta) = sum_s lambda_s/d_s sum_j q^{2j(1+delta)}, j = -s..s
    total = 0.0
    with np.errstate(over="ignore"):
        for s2, lam in phi.weights.items():
            j2 = np.arange(-s2, s2 + 1, 2, dtype=float)
            total += lam / quantum_dim(s2, q) * float(np.sum(q ** (j2 * (1.0 + delta))))
    return total


def _drift(phi: WeightFunctional, q: float, delta: float) -> float:
    total = 0.0
    for s2, lam in phi.weights.items():
        j2 = np.arange(-s2, s2 + 1, 2, dtype=float)
        total += lam / quantum_dim(s2, q) * float(np.sum(j2 * q ** (j2 * (1.0 + delta))))
    return total


def solve_delta(phi: WeightFunctional, q, delta_hi: float = 64.0) -> RenewalData:
    """Find ``delta_phi >= 0`` with ``phi(rho^-delta) = 1`` and the drift ``lambda_phi``."""
    q = as_q(q)
    if not is_generating(phi):
        raise InputError("solve_delta needs a generating functional (some half-odd spin in the support)")
    if phi.norm > 1.0 + 1e-12:
        raise InputError(f"weight functional has norm {phi.norm} > 1")
    if abs(phi.norm - 1.0) <= 1e-12:
        delta = 0.0
    else:
        f_hi = _tilted_mass(phi, q, delta_hi)
        if not f_hi > 1.0:
            raise NumericalError(f"root of phi(rho^-delta) = 1 not bracketed in [0, {delta_hi}]")
        delta = brentq(lambda x: _tilted_mass(phi, q, x) - 1.0, 0.0, delta_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                       maxiter=500)
        if abs(_tilted_mass(phi, q, delta) - 1.0) > 1e-12:
            raise NumericalError("delta root-finding missed |f(delta) - 1| <= 1e-12")
    lam_phi = _drift(phi, q, delta)
    if not lam_phi < 0:
        raise NumericalError(f"drift lambda_phi = {lam_phi} is not negative")
    return RenewalData(delta, lam_phi, renewal_sequence(phi, q))


def asymptotic_report(phi: WeightFunctional, s_max: int, params: DeformationParams,
                      rel_tail: float | None = None) -> list[dict]:
    """Green-ratio and normalized-constant table along ``g(s, 0)``.

    Each row carries ``ratio = g(s+1/2,0)/g(s,0)`` and
    ``constant = g(s,0) d_s q^(-2s(1+delta))`` together with their certified
    half-widths ``ratio_bound`` and ``constant_bound``.
    """
    q = params.q
    ren = solve_delta(phi, q)
    table = green_central(phi, 0, s_max + 1, params, rel_tail=rel_tail)
    d = q_dims(s_max + 1, q)
    g, tb = table.values, table.tail_bounds
    rows = []
    for s2 in range(s_max + 1):
        lo_a, hi_a = g[s2], g[s2] + tb[s2]
        lo_b, hi_b = g[s2 + 1], g[s2 + 1] + tb[s2 + 1]
        ratio = g[s2 + 1] / g[s2] if g[s2] > 0 else math.nan
        ratio_bound = max(abs(hi_b / lo_a - ratio), abs(ratio - lo_b / hi_a)) if lo_a > 0 else math.inf
        scale = d[s2] * q ** (-s2 * (1.0 + ren.delta))
        rows.append({
            "s2": s2,
            "ratio": ratio,
            "ratio_bound": ratio_bound,
            "constant": g[s2] * scale,
            "constant_bound": tb[s2] * scale,
            "value": g[s2],
            "tail_bound": tb[s2],
        })
    return rows


def martin_central(phi: WeightFunctional, t: int, s_max: int, params: DeformationParams,
                   rel_tail: float | None = None) -> tuple[CentralElement, np.ndarray]:
    """Central Martin kernel ``K(I_t)(s) = g(s,t)/g(s,0)`` for ``s <= s_max``.

    Returns the values and a per-row half-width bounding the truncation error.
    Both series are summed until every tail is at most ``rel_tail`` times its
    partial sum (default ``params.tol_tail``), so the division is certified
    on every row.
    """
    if not is_generating(phi):
        raise InputError("the Martin kernel needs a generating functional")
    t = check_label(t)
    if rel_tail is None:
        rel_tail = params.tol_tail
    num = green_central(phi, t, s_max, params, rel_tail=rel_tail)
    den = green_central(phi, 0, s_max, params, rel_tail=rel_tail)
    if np.any(den.values <= den.tail_bounds):
        bad = int(np.argmax(den.values <= den.tail_bounds))
        raise UndercertifiedError(f"g(s,0) at s2={bad} is not certified above its tail bound")
    vals = num.values / den.values
    if t == 0:
        return CentralElement(np.ones_like(vals)), np.zeros_like(vals)
    hi = (num.values + num.tail_bounds) / den.values
    lo = num.values / (den.values + den.tail_bounds)
    return CentralElement(vals), np.maximum(hi - vals, vals - lo)


# ---------------------------------------------------------------------------
# operators on central elements


def central_apply(phi: WeightFunctional, x: np.ndarray, q, out_len: int | None = None) -> np.ndarray:
    """``(P_phi x)(s) = sum_t p_phi(s,t) x(t)`` for ``s < out_len``.

    ``x`` must be known on twice-spins ``< out_len + max supp phi``; it is
    treated as zero beyond its end.
    """
    q = as_q(q)
    x = np.asarray(x, dtype=float)
    if out_len is None:
        out_len = max(x.size - phi.max_label, 1)
    d = q_dims(max(out_len + phi.max_label, x.size), q)
    dx = d[: x.size] * x
    out = np.zeros(out_len)
    for r, c in _phi_arrays(phi, q):
        out += c * band_sum(dx, r, out_len)
    return out / d[:out_len]


def central_power_apply(phi: WeightFunctional, n: int, x: np.ndarray, q, out_len: int) -> np.ndarray:
    """``P_phi^n x`` on ``s < out_len`` using the exact n-step kernel.

    ``x`` is treated as zero beyond its end, which underestimates the result
    for elements that do not vanish there.
    """
    q = as_q(q)
    mu = None
    for k, mu in enumerate(mu_powers(phi, q)):
        if k == n:
            break
    x = np.asarray(x, dtype=float)
    P = kernel_rows(mu, out_len - 1, x.size - 1, q)
    return P @ x


def balayage(phi: WeightFunctional, Y: Sequence[int], x: CentralElement, params: DeformationParams,
             max_iter: int = 100_000) -> tuple[CentralElement, int]:
    """Balayage ``P_{phi,Y}(x) = sum_n [(1 - F_Y) P_phi]^n F_Y x`` on the center.

    The ``n``-th term is ``x`` weighted by the probability of first entering
    ``Y`` at step ``n``.  The iterates are carried on their exact (growing)
    support, so nothing leaks past the cutoff.  The sum is stopped once the
    geometric transience bound on every later entrance,
    ``max_Y x * max_{s,y} F(s,y) * lambda^(n+1) / (1 - lambda)``, is below
    ``params.tol_tail``; the omitted mass is nonnegative, so the result is a
    lower bound within that tolerance.  It is reported on ``0..x.cutoff``
    together with the number of iterations used.  Superharmonicity of ``x``
    is checked on rows whose one-step stencil lies inside the cutoff.
    """
    q, tol = params.q, params.tol_tail
    _check_transient(phi, q)
    Y = sorted({check_label(y) for y in Y})
    if not Y:
        raise InputError("balayage set Y must be nonempty")
    if Y[-1] > x.cutoff:
        raise InputError("balayage set Y must lie inside the cutoff of x")
    xv = x.values
    if np.any(xv < -params.tol_assert):
        raise InputError("balayage input must be entrywise nonnegative")
    R = phi.max_label
    inner = x.cutoff + 1 - R
    if inner > 0:
        Px = central_apply(phi, xv, q, inner)
        excess = Px - xv[:inner]
        if np.any(excess > params.tol_assert):
            bad = int(np.argmax(excess))
            raise InputError(f"input is not superharmonic: (P x - x)({bad}) = {excess[bad]:.3e}")
    ymask = np.zeros(Y[-1] + 1, dtype=bool)
    ymask[Y] = True
    w = np.zeros(Y[-1] + 1)
    w[Y] = xv[Y]
    total = w.copy()
    lam = decay_rate(phi, q)
    # F(s, y) = d_y (s+1) / (d_s (y+1)) <= d_y / (y+1) since d_s >= s+1
    reach = float(np.max(xv[Y])) * max(quantum_dim(y, q) / (y + 1) for y in Y) / (1.0 - lam)
    for it in range(1, max_iter + 1):
        w = central_apply(phi, w, q, w.size + R)
        w[: ymask.size][ymask] = 0.0
        if w.size > MAX_ARRAY_LEN:
            raise ResourceError("balayage support exceeded the label budget")
        grown = np.zeros(w.size)
        grown[: total.size] = total
        total = grown + w
        if reach * lam ** (it + 1) <= tol:
            break
    else:
        raise NumericalError(f"balayage did not converge in {max_iter} iterations")
    out = np.zeros(x.cutoff + 1)
    m = min(out.size, total.size)
    out[:m] = total[:m]
    return CentralElement(out), it


def zero_two_estimate(phi: WeightFunctional, n: int, k: int, s_max: int, q) -> float:
    """Lower bound ``sup_{s <= s_max} sum_t |p_{phi^{n+k}}(s,t) - p_{phi^n}(s,t)|``.

    The true central norm is a supremum over all labels; this is its
    restriction to the rows ``s <= s_max`` and hence a lower bound.
    """
    q = as_q(q)
    if n < 0 or k < 0:
        raise InputError("n and k must be nonnegative")
    mus = []
    for j, mu in enumerate(mu_powers(phi, q)):
        if j == n:
            mus.append(mu)
        if j == n + k:
            mus.append(mu)
            break
    return _zero_two_from(mus[0], mus[-1], s_max, q)


def _zero_two_from(mu_a: np.ndarray, mu_b: np.ndarray, s_max: int, q: float) -> float:
    t_max = s_max + max(mu_a.size, mu_b.size)
    Pa = kernel_rows(mu_a, s_max, t_max, q)
    Pb = kernel_rows(mu_b, s_max, t_max, q)
    return float(np.abs(Pb - Pa).sum(axis=1).max())


def zero_two_sequence(phi: WeightFunctional, n_values: Sequence[int], k: int, s_max: int, q) -> list[float]:
    """:func:`zero_two_estimate` for several ``n`` sharing one pass over the powers."""
    q = as_q(q)
    wanted = sorted(set(n_values))
    need = set(wanted) | {m + k for m in wanted}
    keep: dict[int, np.ndarray] = {}
    for j, mu in enumerate(mu_powers(phi, q)):
        if j in need:
            keep[j] = mu
        if j >= max(need):
            break
    est = {m: _zero_two_from(keep[m], keep[m + k], s_max, q) for m in wanted}
    return [est[m] for m in n_values]
