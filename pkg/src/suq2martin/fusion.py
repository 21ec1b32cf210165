"""Fusion ring of SU_q(2): labels, q-numbers and q-tracial weight functionals.

Irreducible corepresentations are labelled by their *twice-spin* ``n = 2s``,
a nonnegative ``int``; spin ``s`` is never stored as a float.  All fusion
combinatorics is therefore exact integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .exceptions import InputError

__all__ = [
    "DeformationParams",
    "WeightFunctional",
    "as_q",
    "check_dual",
    "check_label",
    "classical_dim",
    "fuse_labels",
    "fusion_coeff",
    "is_generating",
    "q_binomial",
    "log_q_dims",
    "q_dims",
    "q_number",
    "q_pochhammer",
    "quantum_dim",
    "spin",
    "weight_product",
]


@dataclass(frozen=True)
class DeformationParams:
    """Deformation parameter together with the two working tolerances.

    Parameters
    ----------
    q : float
        Deformation parameter, strictly between 0 and 1.
    tol_tail : float
        Target for certified truncation tails of infinite series.
    tol_assert : float
        Tolerance used when checking algebraic identities.
    """

    q: float
    tol_tail: float = 1e-8
    tol_assert: float = 1e-9

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise InputError(f"q must lie in (0, 1), got {self.q!r}")
        if not (self.tol_tail > 0 and self.tol_assert > 0):
            raise InputError("tolerances must be strictly positive")

    def replace(self, **changes) -> "DeformationParams":
        kw = {"q": self.q, "tol_tail": self.tol_tail, "tol_assert": self.tol_assert}
        kw.update(changes)
        return DeformationParams(**kw)


def as_q(q) -> float:
    """Extract ``q`` from either a float or a :class:`DeformationParams`."""
    if isinstance(q, DeformationParams):
        return q.q
    q = float(q)
    if not (0.0 < q < 1.0):
        raise InputError(f"q must lie in (0, 1), got {q!r}")
    return q


def check_label(n) -> int:
    if isinstance(n, (bool, np.bool_)) or int(n) != n or n < 0:
        raise InputError(f"twice-spin label must be a nonnegative integer, got {n!r}")
    return int(n)


def spin(n: int) -> float:
    return n / 2


def classical_dim(n: int) -> int:
    return n + 1


def q_number(n: int, q) -> float:
    """The q-number ``[n]_q = (q^n - q^-n) / (q - q^-1)``.

    Evaluated as ``q^(1-n) (1 - q^(2n)) / (1 - q^2)``, which avoids the
    cancellation of the textbook form for large ``|n|``.
    """
    q = as_q(q)
    n = int(n)
    if n == 0:
        return 0.0
    return q ** (1 - n) * (1.0 - q ** (2 * n)) / (1.0 - q * q)


def quantum_dim(n: int, q) -> float:
    """Quantum dimension ``d_s = [2s+1]_q`` of the label with twice-spin ``n``."""
    return q_number(check_label(n) + 1, q)


def q_dims(n_max: int, q) -> np.ndarray:
    """Quantum dimensions for twice-spins ``0..n_max`` as an array."""
    q = as_q(q)
    m = np.arange(1, n_max + 2, dtype=float)
    with np.errstate(over="ignore"):
        return q ** (1.0 - m) * (1.0 - q ** (2.0 * m)) / (1.0 - q * q)


def log_q_dims(n_max: int, q) -> np.ndarray:
    """Natural logs of the quantum dimensions for twice-spins ``0..n_max``."""
    q = as_q(q)
    m = np.arange(1, n_max + 2, dtype=float)
    return (1.0 - m) * math.log(q) + np.log1p(-(q ** (2.0 * m))) - math.log1p(-q * q)


def q_pochhammer(a: float, r: float, n: int) -> float:
    """``(a; r)_n = prod_{i<n} (1 - a r^i)``; equals 1 for ``n = 0``."""
    out = 1.0
    for i in range(n):
        out *= 1.0 - a * r**i
    return out


def q_binomial(n: int, m: int, base: float) -> float:
    """Gaussian binomial ``(r;r)_n / ((r;r)_m (r;r)_{n-m})`` with ``r = base``."""
    if not (0 <= m <= n):
        raise InputError(f"q_binomial requires 0 <= m <= n, got n={n}, m={m}")
    # product form keeps every factor well-conditioned for 0 < r < 1
    out = 1.0
    for i in range(1, min(m, n - m) + 1):
        out *= (1.0 - base ** (n - i + 1)) / (1.0 - base**i)
    return out


def fuse_labels(r: int, s: int) -> range:
    """Labels ``t`` occurring (once each) in ``U^r x U^s``, as twice-spins."""
    r, s = check_label(r), check_label(s)
    return range(abs(r - s), r + s + 1, 2)


def fusion_coeff(r: int, s: int, t: int) -> int:
    return int(abs(r - s) <= t <= r + s and (r + s - t) % 2 == 0)


@dataclass(frozen=True)
class WeightFunctional:
    """Finitely supported positive functional ``sum_s lambda_s phi_s``.

    ``weights`` maps twice-spin labels to nonnegative reals; zero entries are
    dropped on construction so that ``support`` is exactly ``supp phi``.
    """

    weights: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, v in dict(self.weights).items():
            k = check_label(k)
            v = float(v)
            if not math.isfinite(v) or v < 0:
                raise InputError(f"weight for label {k} must be finite and >= 0, got {v!r}")
            if v > 0:
                clean[k] = clean.get(k, 0.0) + v
        object.__setattr__(self, "weights", MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def state(cls, n: int) -> "WeightFunctional":
        """The q-trace ``phi_s`` on the block of twice-spin ``n``."""
        return cls({n: 1.0})

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "WeightFunctional":
        acc: dict[int, float] = {}
        for k, v in pairs:
            acc[check_label(k)] = acc.get(check_label(k), 0.0) + float(v)
        return cls(acc)

    @property
    def norm(self) -> float:
        return math.fsum(self.weights.values())

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.weights)

    @property
    def max_label(self) -> int:
        return max(self.weights, default=0)

    def is_state(self, tol: float = 1e-12) -> bool:
        return abs(self.norm - 1.0) <= tol

    def scaled(self, c: float) -> "WeightFunctional":
        return WeightFunctional({k: c * v for k, v in self.weights.items()})

    def get(self, n: int) -> float:
        return self.weights.get(n, 0.0)

    def pairs(self) -> list[list]:
        return [[k, v] for k, v in self.weights.items()]

    def __repr__(self):
        return f"WeightFunctional({dict(self.weights)!r})"


def weight_product(phi: WeightFunctional, psi: WeightFunctional, q) -> WeightFunctional:
    """Product in the fusion algebra: ``phi_s phi_t = sum_w d_w/(d_s d_t) phi_w``."""
    q = as_q(q)
    out: dict[int, float] = {}
    for s, a in phi.weights.items():
        ds = quantum_dim(s, q)
        for t, b in psi.weights.items():
            scale = a * b / (ds * quantum_dim(t, q))
            for w in fuse_labels(s, t):
                out[w] = out.get(w, 0.0) + scale * quantum_dim(w, q)
    return WeightFunctional(out)


def check_dual(phi: WeightFunctional) -> WeightFunctional:
    """Conjugation ``phi -> phi-check``.

    Every SU_q(2) label is self-conjugate, so this is the identity; it is kept
    as an explicit hook so that a different fusion ring could override it.
    """
    return phi


def is_generating(phi: WeightFunctional) -> bool:
    """True iff some half-odd-integer spin carries positive weight."""
    return any(n % 2 == 1 for n in phi.weights)
