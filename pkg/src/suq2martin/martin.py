"""Markov operator on block elements, block Green functions and the Martin kernel.

The one-step operator ``P_phi = (phi (x) id) Delta`` is evaluated block by
block through Clebsch-Gordan isometries.  Its iterates are never formed:
because ``P_phi^n = P_{phi^n}`` and ``phi^n = sum_r mu_n(r) phi_r`` in the
fusion algebra, the potential of ``x`` is

    G_phi(x) = sum_r d_r gamma(r) P_{phi_r}(x),   gamma = sum_n nu_n,

with the same scaled Green weights ``gamma`` as on the center.  The only
truncation is the number of summed powers, certified by the geometric
transience bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .blocks import BlockElement, cg_isometry, haar_pairing, op_norm, rep_matrices
from .central import green_weights, solve_delta
from .exceptions import InputError, UndercertifiedError
from .fusion import (
    DeformationParams,
    WeightFunctional,
    as_q,
    check_label,
    fuse_labels,
    is_generating,
    q_binomial,
    q_dims,
    q_pochhammer,
    quantum_dim,
)

__all__ = [
    "BlockGreen",
    "DeviationReport",
    "PolynomialQ",
    "boundary_deviation",
    "boundary_polynomial",
    "boundary_values",
    "duality_residual",
    "fourier_alpha_power",
    "green_block",
    "harmonic_residual",
    "leading_coefficient",
    "markov_step",
    "martin_apply",
    "martin_gap",
    "tilde_polynomial",
]


# ---------------------------------------------------------------------------
# one step


def _partial_trace(r: int, t: int, w: int, xw: np.ndarray, q: float) -> np.ndarray:
    """``Tr_1((K_r^2 (x) 1) V x_w V^T)`` for ``V: H_w -> H_r (x) H_t``.

    Equals ``d_r (phi_r (x) id)`` applied to the ``B(H_r) (x) B(H_t)``
    component of the coproduct of ``x_w``.
    """
    T = cg_isometry(r, t, w, q).as_tensor()
    k2 = np.diag(rep_matrices(r, q).K) ** 2
    return np.einsum("a,abm,mn,acn->bc", k2, T, xw, T, optimize=True)


def _output_labels(phi_labels: Iterable[int], x: BlockElement, r_max: int | None) -> list[int]:
    if not x.finitely_supported:
        if r_max is None:
            raise InputError("an element with constant extension needs an explicit r_max")
        return list(range(r_max + 1))
    out = set()
    for r in phi_labels:
        for w in x.blocks:
            out.update(fuse_labels(r, w))
    if r_max is not None:
        out = {t for t in out if t <= r_max}
    return sorted(out)


def markov_step(phi: WeightFunctional, x: BlockElement, q, r_max: int | None = None) -> BlockElement:
    """``P_phi(x)`` on every block it can reach (or on blocks ``<= r_max``).

    Output block ``t`` is ``sum_r lambda_r / d_r sum_w Tr_1((K_r^2 (x) 1) V x_w V^T)``
    over input blocks ``w`` in the fusion of ``r`` and ``t``.  Elements with
    a constant extension beyond their cutoff are accepted when ``r_max`` is
    given.
    """
    q = as_q(q)
    out = {}
    for t in _output_labels(phi.weights, x, r_max):
        acc = np.zeros((t + 1, t + 1))
        for r, lam in phi.weights.items():
            scale = lam / quantum_dim(r, q)
            for w in fuse_labels(r, t):
                if x.finitely_supported and w not in x.blocks:
                    continue
                acc += scale * _partial_trace(r, t, w, x.block(w), q)
        out[t] = acc
    return BlockElement(out)


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class BlockGreen:
    """Partial sum of ``G_phi(x)`` with per-block truncation bounds.

    ``tail_bounds[t]`` bounds the operator norm of the omitted part of
    block ``t``; ``g0`` holds the central values ``g(t, 0)`` from the same
    run with their own bounds ``g0_tail``.
    """

    value: BlockElement
    tail_bounds: dict
    g0: dict
    g0_tail: dict
    n_terms: int
    decay: float


def _check_finite(x: BlockElement) -> None:
    if not x.finitely_supported:
        raise InputError("the potential needs a finitely supported element")
    if not x.blocks:
        raise InputError("the potential of the zero element is not informative; pass a nonzero element")


def _pieces(x: BlockElement, r_max: int, q: float) -> dict:
    """Unnormalized partial traces ``A[t] = [(r, A_{r,t})]`` for ``t <= r_max``."""
    pieces = {}
    for t in range(r_max + 1):
        acc: dict[int, np.ndarray] = {}
        for w, xw in x.blocks.items():
            for r in fuse_labels(t, w):
                a = _partial_trace(r, t, w, xw, q)
                acc[r] = acc[r] + a if r in acc else a
        pieces[t] = sorted(acc.items())
    return pieces


def _tail_factors(x: BlockElement, r_max: int, q: float) -> np.ndarray:
    """``sum_w ||x_w|| d_w (2t+1) / (d_t (2w+1))`` for ``t <= r_max``.

    The map ``x_w -> P^n(x_w)_t`` is completely positive with value
    ``p_{phi^n}(t, w) I_t`` at the unit, so its norm is that probability;
    combined with the geometric bound this controls every omitted term.
    """
    top = max(r_max, max(x.blocks))
    d = q_dims(top, q)
    t = np.arange(r_max + 1)
    out = np.zeros(r_max + 1)
    for w, xw in x.blocks.items():
        out += op_norm(xw) * d[w] * (t + 1) / (d[t] * (w + 1))
    return out


def green_block(phi: WeightFunctional, x: BlockElement, r_max: int, params: DeformationParams,
                rel_tail: float | None = None, martin_tol: float | None = None) -> BlockGreen:
    """Certified ``G_phi(x) = sum_n P_phi^n(x)`` on blocks ``t <= r_max``.

    Powers are summed until every block's tail bound is at most
    ``params.tol_tail``.  ``rel_tail`` additionally requires each bound to
    be that fraction of the block's norm; ``martin_tol`` requires the
    propagated Martin-kernel half-width (see :func:`martin_apply`) to fall
    below it.
    """
    q = params.q
    r_max = check_label(r_max)
    _check_finite(x)
    pieces = _pieces(x, r_max, q)
    F = _tail_factors(x, r_max, q)
    d = q_dims(r_max, q)
    F0 = (np.arange(r_max + 1) + 1) / d  # tail factor of g(t, 0)
    w_top = max(x.blocks)

    def assemble(gamma):
        return {t: sum((gamma[r] * a for r, a in pieces[t]), np.zeros((t + 1, t + 1))) for t in pieces}

    def rel_of(gamma, tail):
        G = assemble(gamma)
        worst = 0.0
        for t, b in G.items():
            nb = op_norm(b)
            if rel_tail is not None:
                worst = max(worst, F[t] * tail / (nb * rel_tail) if nb > 0 else (math.inf if F[t] > 0 else 0.0))
            if martin_tol is not None:
                g0 = gamma[t] / d[t]
                if g0 <= 0:
                    return math.inf
                hw = F[t] * tail / g0 + nb * F0[t] * tail / g0**2
                worst = max(worst, hw / martin_tol)
        return worst

    need_rel = rel_tail is not None or martin_tol is not None
    gamma, N, lam = green_weights(
        phi, r_max + w_top, params, factor=float(max(F.max(), F0.max())),
        rel_tail=1.0 if need_rel else None, rel_of=rel_of,
    )
    tail = lam ** (N + 1) / (1.0 - lam)
    G = assemble(gamma)
    return BlockGreen(
        value=BlockElement(G),
        tail_bounds={t: float(F[t] * tail) for t in G},
        g0={t: float(gamma[t] / d[t]) for t in G},
        g0_tail={t: float(F0[t] * tail) for t in G},
        n_terms=N,
        decay=lam,
    )


def martin_apply(phi: WeightFunctional, x: BlockElement, r_max: int, params: DeformationParams,
                 martin_tol: float | None = None) -> tuple[BlockElement, dict]:
    """Martin kernel ``K_phi(x) = G_phi(x) G_phi(I_0)^-1`` on blocks ``<= r_max``.

    Block ``t`` of the potential is divided by the scalar ``g(t, 0)``.  The
    partial sums underestimate ``g``, so with ``G~, g~`` the computed values

        ||K_t - G~_t / g~_t|| <= tail_G / g~ + ||G~_t|| tail_g / g~^2,

    and the series is extended until this half-width is below
    ``martin_tol`` (default ``params.tol_tail``).  Returns the kernel and
    the per-block half-widths.
    """
    if not is_generating(phi):
        raise InputError("the Martin kernel needs a generating functional")
    tol = params.tol_tail if martin_tol is None else martin_tol
    bg = green_block(phi, x, r_max, params, martin_tol=tol)
    out, hw = {}, {}
    for t, b in bg.value.blocks.items():
        g0 = bg.g0[t]
        if g0 <= bg.g0_tail[t]:
            raise UndercertifiedError(f"g(t,0) at block {t} is not certified above its tail bound")
        out[t] = b / g0
        hw[t] = bg.tail_bounds[t] / g0 + op_norm(b) * bg.g0_tail[t] / g0**2
    return BlockElement(out), hw


def fourier_alpha_power(n: int, q) -> BlockElement:
    """Fourier image of ``(alpha*)^n``: ``(q^-n / d_{n/2}) m_{-n/2,-n/2}`` on block ``n``."""
    n = check_label(n)
    q = as_q(q)
    return BlockElement.matrix_unit(n, -n, -n, q ** (-n) / quantum_dim(n, q))


# ---------------------------------------------------------------------------
# boundary polynomials


@dataclass(frozen=True)
class PolynomialQ:
    """Real polynomial with ascending coefficients and a provenance tag."""

    coeffs: np.ndarray
    tag: str

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> float:
        return float(self.coeffs[-1])

    def __call__(self, x):
        return npoly.polyval(x, self.coeffs)


def boundary_values(n: int, c: float, q, x) -> np.ndarray:
    """Evaluate ``p_n`` at ``x`` by running the recurrence on values.

    ``p_k`` is carried on the grid ``x q^(-2j)``, ``j = 0..n-k``.  This avoids
    the cancellation of summing the rapidly growing coefficients; at
    ``x = 1`` it reproduces ``c^n`` exactly.
    """
    n = check_label(n)
    q = as_q(q)
    x = np.asarray(x, dtype=float)
    grid = x[..., None] * q ** (-2.0 * np.arange(n + 1))
    vals = np.ones_like(grid)
    for k in range(n):
        g = grid[..., : n - k]
        vals = c * vals[..., :-1] * g - (g - 1.0) * vals[..., 1:] / c
    return vals[..., 0]


def boundary_polynomial(n: int, c: float, q) -> PolynomialQ:
    """``p_{n+1}(x) = c p_n(x) x - c^-1 p_n(q^-2 x)(x - 1)`` with ``p_0 = 1``."""
    n = check_label(n)
    q = as_q(q)
    if not (0.0 < c < 1.0):
        raise InputError(f"c must lie in (0, 1), got {c!r}")
    p = np.array([1.0])
    for _ in range(n):
        scaled = p * q ** (-2.0 * np.arange(p.size))
        p = npoly.polysub(c * npoly.polymulx(p), npoly.polymul(scaled, [-1.0, 1.0]) / c)
    return PolynomialQ(np.asarray(p, dtype=float), "recurrence")


def leading_coefficient(n: int, c: float, q) -> float:
    """``(-1)^n q^(-n(n-1)) c^-n (c^2; q^2)_n``."""
    q = as_q(q)
    return (-1) ** n * q ** (-n * (n - 1)) * c ** (-n) * q_pochhammer(c * c, q * q, n)


def _f_poly(a: int, b: int, q: float) -> np.ndarray:
    """``q^(-2ab) x^a (x; q^-2)_b`` as ascending coefficients."""
    p = np.zeros(a + 1)
    p[a] = q ** (-2.0 * a * b)
    for i in range(b):
        p = npoly.polymul(p, [1.0, -(q ** (-2.0 * i))])
    return p


def tilde_polynomial(n: int, q) -> PolynomialQ:
    """Explicit q-binomial form of the boundary polynomial for ``c = q^2``.

    ``sum_{k=0}^{n} q^(-2(m-k)) [n, m]_{q^2} q^(-2km) x^k (x; q^-2)_m``
    with ``m = n - k``.
    """
    n = check_label(n)
    q = as_q(q)
    out = np.zeros(n + 1)
    for k in range(n + 1):
        m = n - k
        term = q ** (-2.0 * (m - k)) * q_binomial(n, m, q * q) * _f_poly(k, m, q)
        out[: term.size] += term
    return PolynomialQ(out, "tilde")


# ---------------------------------------------------------------------------
# boundary behaviour


@dataclass(frozen=True)
class DeviationReport:
    """Per-block distance between the Martin image and the boundary polynomial.

    Each row holds ``r2``, the operator-norm deviation ``D``, the largest
    entry deviation ``D_entry`` and the propagated truncation half-width
    ``tail_bound``.
    """

    n: int
    c: float
    rows: list

    def D(self) -> dict:
        return {row["r2"]: row["D"] for row in self.rows}


def boundary_deviation(phi: WeightFunctional, n: int, r_range: Sequence[int], params: DeformationParams,
                       martin_tol: float | None = None) -> DeviationReport:
    """``D(r) = || K_phi(F((alpha*)^n))|_r - diag(p_n(q^(2r-2j))) ||`` for ``r`` in ``r_range``.

    ``c`` is ``q^(2 + delta_phi)``; the comparison is defined for states,
    where ``delta_phi = 0``.
    """
    q = params.q
    if not phi.is_state():
        raise InputError("boundary_deviation compares against the state polynomial; phi must have norm 1")
    r_range = sorted({check_label(r) for r in r_range})
    if not r_range:
        raise InputError("r_range must be nonempty")
    c = q ** (2.0 + solve_delta(phi, q).delta)
    K, hw = martin_apply(phi, fourier_alpha_power(n, q), r_range[-1], params, martin_tol)
    rows = []
    for r in r_range:
        j2 = np.arange(-r, r + 1, 2)
        diff = K.block(r) - np.diag(boundary_values(n, c, q, q ** (r - j2.astype(float))))
        rows.append({"r2": r, "D": op_norm(diff), "D_entry": float(np.abs(diff).max()),
                     "tail_bound": hw.get(r, 0.0)})
    return DeviationReport(n, c, rows)


def martin_gap(phi: WeightFunctional, psi: WeightFunctional, x: BlockElement, r_range: Sequence[int],
               params: DeformationParams, martin_tol: float | None = None) -> list[dict]:
    """Blockwise ``||K_phi(x)|_r - K_psi(x)|_r||`` with the summed half-widths."""
    r_range = sorted({check_label(r) for r in r_range})
    Ka, ha = martin_apply(phi, x, r_range[-1], params, martin_tol)
    Kb, hb = martin_apply(psi, x, r_range[-1], params, martin_tol)
    return [{"r2": r, "value": op_norm(Ka.block(r) - Kb.block(r)),
             "tail_bound": ha.get(r, 0.0) + hb.get(r, 0.0)} for r in r_range]


def duality_residual(phi: WeightFunctional, x: BlockElement, y: BlockElement, q) -> float:
    """``|(P_phi x, y) - (x, P_phi y)|`` for the Haar pairing (``phi`` is self-conjugate)."""
    q = as_q(q)
    lhs = haar_pairing(markov_step(phi, x, q), y, q)
    rhs = haar_pairing(x, markov_step(phi, y, q), q)
    return abs(lhs - rhs)


def harmonic_residual(phi: WeightFunctional, x: BlockElement, r_max: int, q) -> float:
    """``max_{t <= r_max} ||P_phi(x)_t - x_t||``.

    ``x`` must be known on blocks up to ``r_max + max supp phi``; beyond its
    cutoff only constant extension is available.
    """
    q = as_q(q)
    r_max = check_label(r_max)
    Px = markov_step(phi, x, q, r_max=r_max)
    return max(op_norm(Px.block(t) - x.block(t)) for t in range(r_max + 1))
