"""Invariant suites and acceptance criteria.

Every check returns a :class:`Check` with the measured quantity and the
threshold it is compared against, so that callers (the CLI, the test suite)
can report numbers rather than bare booleans.  Randomized checks draw from a
``numpy.random.Generator`` seeded by the caller.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .blocks import (
    BlockElement,
    CGIsometry,
    adjoint_action,
    cg_isometry,
    cg_residuals,
    chi0_identity_residual,
    haar_pairing,
    op_norm,
    podles_residuals,
    rep_matrices,
    spin1_adjoint_residual,
)
from .central import (
    CentralElement,
    asymptotic_report,
    balayage,
    central_power_apply,
    decay_rate,
    green_central,
    kernel_rows,
    martin_central,
    mu_powers,
    renewal_sequence,
    transition_kernel,
    zero_two_sequence,
)
from .fusion import (
    DeformationParams,
    WeightFunctional,
    fuse_labels,
    q_dims,
    q_number,
    quantum_dim,
    weight_product,
)
from .martin import (
    boundary_deviation,
    boundary_polynomial,
    boundary_values,
    fourier_alpha_power,
    green_block,
    harmonic_residual,
    leading_coefficient,
    markov_step,
    martin_gap,
    tilde_polynomial,
)

__all__ = [
    "ACCEPTANCE",
    "Check",
    "INVARIANT_SUITES",
    "Q_VALUES",
    "criterion_result",
    "run_suite",
]

Q_VALUES = (0.3, 0.5, 0.8)
PHI_HALF = WeightFunctional.state(1)
# generating states used wherever "several distinct states" are asked for
STATES = (
    WeightFunctional.state(1),
    WeightFunctional({1: 0.5, 2: 0.5}),
    WeightFunctional({1: 0.2, 3: 0.5, 4: 0.3}),
)
MIXED = WeightFunctional({1: 0.5, 2: 0.3, 3: 0.2})


@dataclass(frozen=True)
class Check:
    """Outcome of one numerical check: ``passed`` iff ``value`` meets ``threshold``."""

    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name}: {self.value:.3e} (threshold {self.threshold:.1e})"
        return f"{text}  {self.detail}" if self.detail else text


def _le(name: str, value: float, threshold: float, detail: str = "") -> Check:
    return Check(name, bool(value <= threshold), float(value), float(threshold), detail)


def _ge(name: str, value: float, threshold: float, detail: str = "") -> Check:
    return Check(name, bool(value >= threshold), float(value), float(threshold), detail)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _random_functional(rng: np.random.Generator, max_label: int = 4, norm: float = 1.0) -> WeightFunctional:
    labels = rng.choice(np.arange(1, max_label + 1), size=rng.integers(1, max_label + 1), replace=False)
    w = rng.random(labels.size) + 0.05
    return WeightFunctional(dict(zip(labels.tolist(), (norm * w / w.sum()).tolist())))


def _random_block(rng: np.random.Generator, labels) -> BlockElement:
    return BlockElement({int(n): rng.standard_normal((n + 1, n + 1)) for n in labels})


# ---------------------------------------------------------------------------
# invariant suites (run at a single q)


def suite_fusion(q: float, rng: np.random.Generator) -> list[Check]:
    out = []
    worst = 0.0
    classical_ok = True
    for r, s in itertools.product(range(21), repeat=2):
        worst = max(worst, _rel(sum(quantum_dim(t, q) for t in fuse_labels(r, s)), quantum_dim(r, q) * quantum_dim(s, q)))
        classical_ok &= sum(t + 1 for t in fuse_labels(r, s)) == (r + 1) * (s + 1)
    out.append(_le("quantum dimensions are multiplicative (labels <= 20)", worst, 1e-10))
    out.append(Check("classical dimensions are multiplicative", classical_ok, 0.0 if classical_ok else 1.0, 0.0))
    assoc = comm = normerr = 0.0
    for _ in range(20):
        a, b, c = (_random_functional(rng, 5, rng.uniform(0.3, 1.0)) for _ in range(3))
        ab_c = weight_product(weight_product(a, b, q), c, q)
        a_bc = weight_product(a, weight_product(b, c, q), q)
        ba = weight_product(b, a, q)
        ab = weight_product(a, b, q)
        keys = set(ab_c.weights) | set(a_bc.weights)
        assoc = max(assoc, max(abs(ab_c.get(k) - a_bc.get(k)) for k in keys))
        comm = max(comm, max(abs(ab.get(k) - ba.get(k)) for k in set(ab.weights) | set(ba.weights)))
        normerr = max(normerr, abs(ab.norm - a.norm * b.norm))
    out.append(_le("weight product is associative", assoc, 1e-12))
    out.append(_le("weight product is commutative", comm, 1e-12))
    out.append(_le("norm is multiplicative", normerr, 1e-12))
    qi = 1.0 / q
    sym = max(_rel(q_number(n, q), (qi**n - q**n) / (qi - q)) for n in range(1, 31))
    out.append(_le("q-number symmetry under q -> 1/q (n <= 30)", sym, 1e-12))
    return out


def suite_central(q: float, rng: np.random.Generator) -> list[Check]:
    params = DeformationParams(q)
    phi = _random_functional(rng, 4)
    out = []
    stoch = max(abs(sum(transition_kernel(phi, s, t, q) for t in range(s + 5)) - 1.0) for s in range(21))
    out.append(_le("one-step kernel is stochastic (labels <= 20)", stoch, 1e-12))
    dual = max(
        _rel(transition_kernel(phi, s, t, q), (quantum_dim(t, q) / quantum_dim(s, q)) ** 2 * transition_kernel(phi, t, s, q))
        for s in range(21) for t in range(21) if transition_kernel(phi, s, t, q) > 0
    )
    out.append(_le("kernel self-duality p(s,t) = (d_t/d_s)^2 p(t,s)", dual, 1e-12))
    mus = [m for _, m in zip(range(7), mu_powers(phi, q))]
    ck = 0.0
    for m, n in ((1, 2), (2, 3), (3, 3)):
        P = {k: kernel_rows(mus[k], 40, 40, q) for k in (m, n, m + n)}
        ck = max(ck, float(np.max(np.abs(P[m + n][:10, :10] - (P[m] @ P[n])[:10, :10]))))
    out.append(_le("Chapman-Kolmogorov for convolution powers", ck, 1e-12))
    coarse = green_central(phi, 0, 20, params)
    fine = green_central(phi, 0, 20, params.replace(tol_tail=params.tol_tail * 1e-4))
    excess = float(np.max(np.abs(fine.values - coarse.values) - coarse.tail_bounds))
    out.append(_le("green tail bound covers a longer run", excess, 0.0))
    out.append(_le("renewal inversion of p(s,0) (labels <= 20)", _renewal_inversion_error(phi, q), 1e-12))
    K0, _ = martin_central(phi if phi.max_label % 2 else WeightFunctional.state(1), 0, 20, params)
    out.append(_le("Martin kernel of I_0 is identically 1", float(np.max(np.abs(K0.values - 1.0))), 0.0))
    out.append(_le("geometric transience bound (n <= 30)", _geometric_bound_violation(phi, q, 30, 20), 0.0))
    return out


def suite_blocks(q: float, rng: np.random.Generator) -> list[Check]:
    out = []
    comm = 0.0
    for n in range(21):
        E, F, K, Kinv = rep_matrices(n, q)[1:]
        scale = max(op_norm(K) * op_norm(E), 1.0)
        comm = max(comm, op_norm(K @ E - q * E @ K) / scale)
        rhs = (K @ K - Kinv @ Kinv) / (q - 1.0 / q)
        comm = max(comm, op_norm(E @ F - F @ E - rhs) / max(op_norm(E) ** 2, op_norm(rhs), 1.0))
    out.append(_le("U_q(su2) relations per block (labels <= 20, normwise)", comm, 1e-12))
    out.append(_le("Podles relations (spin <= 8)", max(podles_residuals(n, q).max() for n in range(17)), 1e-9))
    out.append(_le("chi_0 identity (spin <= 8, relative)", max(chi0_identity_residual(n, q) for n in range(17)), 1e-10))
    out.append(_le("spin-1 adjoint action (spin <= 8)", max(spin1_adjoint_residual(n, q) for n in range(17)), 1e-10))
    orth, inter, comp = _cg_suite(q, 16, 12)
    out.append(_le("CG orthonormality (spin <= 8)", orth, 1e-10))
    out.append(_le("CG intertwining e, f, k (spin <= 8, normwise)", inter, 1e-9))
    out.append(_le("CG completeness (spin <= 6)", comp, 1e-9))
    pos = math.inf
    for _ in range(20):
        x = _random_block(rng, rng.choice(7, size=2, replace=False))
        xs = BlockElement({n: b + b.T for n, b in x.blocks.items()})
        pos = min(pos, haar_pairing(xs, xs, q))
    out.append(_ge("Haar pairing is positive on self-adjoint blocks", pos, 1e-12))
    return out


def suite_martin(q: float, rng: np.random.Generator) -> list[Check]:
    params = DeformationParams(q)
    out = []
    unit = BlockElement({0: np.eye(1)}, cutoff=0, fill=1.0)
    out.append(_le("P_phi is unital for a state", harmonic_residual(MIXED, unit, 10, q), 1e-12))
    sub = MIXED.scaled(0.9)
    out.append(_le("P_phi(1) = |phi| 1 for |phi| = 0.9", abs(harmonic_residual(sub, unit, 10, q) - 0.1), 1e-12))
    mineig = math.inf
    for _ in range(10):
        x = _random_block(rng, range(5))
        psd = BlockElement({n: b @ b.T for n, b in x.blocks.items()})
        Px = markov_step(MIXED, psd, q)
        mineig = min(mineig, min(np.linalg.eigvalsh(b).min() / max(1.0, op_norm(b)) for b in Px.blocks.values()))
    out.append(_ge("P_phi preserves positivity", mineig, -1e-10))
    cent = 0.0
    for t in range(5):
        Px = markov_step(MIXED, BlockElement.unit([t]), q)
        cent = max(cent, max(_rel(b[0, 0], transition_kernel(MIXED, s, t, q)) + op_norm(b - b[0, 0] * np.eye(s + 1))
                             for s, b in Px.blocks.items()))
    bg = green_block(PHI_HALF, BlockElement.unit([0]), 12, params)
    gc = green_central(PHI_HALF, 0, 12, params)
    cent = max(cent, max(_rel(bg.value.block(t)[0, 0], gc.values[t]) for t in range(13)))
    out.append(_le("central consistency of markov_step and green_block", cent, 1e-10))
    out.append(_le("adjoint covariance of P_phi (spin <= 6, normwise)", _covariance_error(MIXED, q, rng, 12), 1e-9))
    out.append(_le("Haar duality, 50 random pairs (spin <= 3, relative)", _duality_error(MIXED, q, rng, 50, 6), 1e-10))
    out.extend(_polynomial_checks(q))
    mono = 0.0
    for n in (1, 2):
        rep = boundary_deviation(PHI_HALF, n, range(8, 25), params)
        for a, b in zip(rep.rows, rep.rows[1:]):
            mono = max(mono, b["D"] - a["D"] - a["tail_bound"] - b["tail_bound"])
    out.append(_le("boundary deviation nonincreasing beyond spin 4", mono, 0.0))
    return out


INVARIANT_SUITES: dict[str, Callable[[float, np.random.Generator], list[Check]]] = {
    "fusion": suite_fusion,
    "central": suite_central,
    "blocks": suite_blocks,
    "martin": suite_martin,
}


# ---------------------------------------------------------------------------
# shared helpers


def _renewal_inversion_error(phi: WeightFunctional, q: float, s_max: int = 20) -> float:
    p = renewal_sequence(phi, q)
    worst = 0.0
    for s2 in range(s_max + 1):
        a = q**s2 * p.get(-s2, 0.0)
        b = q ** (s2 + 2) * p.get(-s2 - 2, 0.0)
        d = quantum_dim(s2, q)
        lhs = transition_kernel(phi, s2, 0, q)
        worst = max(worst, abs(lhs - (a - b) / d) / max(abs(lhs), (a + b) / d, 1e-300))
    return worst


def _geometric_bound_violation(phi: WeightFunctional, q: float, n_max: int, lab_max: int) -> float:
    lam = decay_rate(phi, q)
    d = q_dims(lab_max, q)
    s = np.arange(lab_max + 1)
    F = d[None, :] * (s[:, None] + 1) / (d[:, None] * (s[None, :] + 1))
    worst = 0.0
    for n, mu in zip(range(n_max + 1), mu_powers(phi, q)):
        P = kernel_rows(mu, lab_max, lab_max, q)
        worst = max(worst, float(np.max(P - F * lam**n * (1 + 1e-12))))
    return max(worst, 0.0)


def _cg_suite(q: float, lab_max: int, comp_max: int) -> tuple[float, float, float]:
    orth = inter = comp = 0.0
    for r, t in itertools.product(range(lab_max + 1), repeat=2):
        S = np.zeros(((r + 1) * (t + 1),) * 2)
        for w in fuse_labels(r, t):
            cg = cg_isometry(r, t, w, q)
            res = cg_residuals(cg, q)
            orth = max(orth, res["orthonormality"])
            inter = max(inter, res["e"], res["f"], res["k"])
            if r <= comp_max and t <= comp_max:
                S += cg.V @ cg.V.T
        if r <= comp_max and t <= comp_max:
            comp = max(comp, op_norm(S - np.eye(S.shape[0])))
    return orth, inter, comp


def _covariance_error(phi: WeightFunctional, q: float, rng: np.random.Generator, lab_max: int) -> float:
    y = _random_block(rng, range(lab_max + 1))
    worst = 0.0
    for X in "efk":
        a = markov_step(phi, adjoint_action(X, y, q), q)
        b = adjoint_action(X, markov_step(phi, y, q), q)
        for t in range(lab_max + 1):
            worst = max(worst, op_norm(a.block(t) - b.block(t)) / max(1.0, op_norm(b.block(t))))
    return worst


def _duality_error(phi: WeightFunctional, q: float, rng: np.random.Generator, pairs: int, lab_max: int) -> float:
    worst = 0.0
    for _ in range(pairs):
        x = _random_block(rng, rng.choice(lab_max + 1, size=rng.integers(1, 4), replace=False))
        y = _random_block(rng, rng.choice(lab_max + 1, size=rng.integers(1, 4), replace=False))
        lhs = haar_pairing(markov_step(phi, x, q), y, q)
        rhs = haar_pairing(x, markov_step(phi, y, q), q)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs)))
    return worst


def _polynomial_checks(q: float, n_max: int = 10) -> list[Check]:
    ident = one = lead = 0.0
    for n in range(n_max + 1):
        a = tilde_polynomial(n, q).coeffs
        b = boundary_polynomial(n, q * q, q).coeffs
        ident = max(ident, float(np.max(np.abs(a - b) / np.abs(b))))
        one = max(one, _rel(float(boundary_values(n, q * q, q, 1.0)), q ** (2 * n)))
        lead = max(lead, _rel(b[-1], leading_coefficient(n, q * q, q)))
    return [
        _le("explicit q-binomial polynomial equals the recurrence (n <= 10)", ident, 1e-8),
        _le("p_n(1) = q^(2n)", one, 1e-10),
        _le("leading coefficient law", lead, 1e-8),
    ]


# ---------------------------------------------------------------------------
# acceptance criteria


def criterion_1(rng=None) -> list[Check]:
    out = []
    for q in Q_VALUES:
        t0 = time.perf_counter()
        params = DeformationParams(q, tol_tail=1e-10)
        row = asymptotic_report(PHI_HALF, 60, params, rel_tail=1e-10)[60]
        elapsed = time.perf_counter() - t0
        dev = abs(row["ratio"] - q * q) + row["ratio_bound"]
        out.append(_le(f"ratio g(30.5,0)/g(30,0) vs q^2 at q={q}", dev, 5e-3))
        out.append(_le(f"certified tail at q={q}", row["tail_bound"], 1e-10))
        out.append(_le(f"runtime at q={q} [s]", elapsed, 10.0))
    return out


def criterion_2(rng=None) -> list[Check]:
    params = DeformationParams(0.5, tol_tail=1e-10)
    row = asymptotic_report(PHI_HALF, 60, params, rel_tail=1e-10)[60]
    dev = abs(row["constant"] / 1.25 - 1.0) + row["constant_bound"] / 1.25
    return [_le("g(30,0) d_30 q^-60 within 1% of 1.25", dev, 0.01, f"constant={row['constant']!r}")]


def criterion_3(rng=None) -> list[Check]:
    return [_le(f"renewal inversion of p(s,0), state {i} at q={q}", _renewal_inversion_error(phi, q), 1e-12)
            for q in Q_VALUES for i, phi in enumerate(STATES)]


def criterion_4(rng=None) -> list[Check]:
    worst = max(_geometric_bound_violation(phi, q, 60, 30) for q in Q_VALUES for phi in STATES)
    return [_le("geometric bound violations (n <= 60, spins <= 15)", worst, 0.0)]


def criterion_5(rng=None) -> list[Check]:
    t0 = time.perf_counter()
    pod = max(podles_residuals(n, q).max() for q in Q_VALUES for n in range(17))
    chi0 = max(chi0_identity_residual(n, q) for q in Q_VALUES for n in range(17))
    spin1 = max(spin1_adjoint_residual(n, q) for q in Q_VALUES for n in range(17))
    elapsed = time.perf_counter() - t0
    return [
        _le("Podles relations (spin <= 8)", pod, 1e-9),
        _le("chi_0 identity (relative)", chi0, 1e-10),
        _le("spin-1 adjoint action", spin1, 1e-10),
        _le("runtime [s]", elapsed, 5.0),
    ]


def criterion_6(rng=None) -> list[Check]:
    rng = rng if rng is not None else np.random.default_rng(42)
    out = []
    for q in Q_VALUES:
        orth, inter, comp = _cg_suite(q, 16, 16)
        out.append(_le(f"CG orthonormality at q={q}", orth, 1e-9))
        out.append(_le(f"CG intertwining at q={q}", inter, 1e-9))
        out.append(_le(f"CG completeness at q={q}", comp, 1e-9))
    cg = cg_isometry(4, 4, 4, 0.5)
    bad = CGIsometry(4, 4, 4, cg.V + 1e-6 * rng.standard_normal(cg.V.shape))
    worst = max(cg_residuals(bad, 0.5).values())
    out.append(_ge("negative control: perturbed V is rejected", worst, 1e-9))
    return out


def criterion_7(rng=None) -> list[Check]:
    rng = rng if rng is not None else np.random.default_rng(42)
    return [_le(f"Haar duality at q={q}, 50 pairs", _duality_error(MIXED, q, rng, 50, 6), 1e-10) for q in Q_VALUES]


def criterion_8(rng=None) -> list[Check]:
    out = []
    for q in Q_VALUES:
        out.extend(Check(f"{c.name} at q={q}", c.passed, c.value, c.threshold) for c in _polynomial_checks(q))
    return out


def criterion_9(rng=None) -> list[Check]:
    t0 = time.perf_counter()
    params = DeformationParams(0.5)
    out = []
    for n in (1, 2):
        rep = boundary_deviation(PHI_HALF, n, range(8, 25), params)
        D = rep.D()
        out.append(_le(f"D(12)/D(4) for n={n}", D[24] / D[8], 0.1))
        mono = max(b["D"] - a["D"] - a["tail_bound"] - b["tail_bound"] for a, b in zip(rep.rows, rep.rows[1:]))
        out.append(_le(f"D(r) nonincreasing over spins 4..12 for n={n}", max(mono, 0.0), 0.0))
    out.append(_le("runtime [s]", time.perf_counter() - t0, 120.0))
    return out


def criterion_10(rng=None) -> list[Check]:
    params = DeformationParams(0.5)
    psi = WeightFunctional({1: 0.5, 2: 0.5})
    rows = {r["r2"]: r for r in martin_gap(PHI_HALF, psi, fourier_alpha_power(1, 0.5), [8, 24], params)}
    lo = rows[8]["value"] - rows[8]["tail_bound"]
    hi = rows[24]["value"] + rows[24]["tail_bound"]
    return [_ge("shrink factor of the Martin gap from spin 4 to 12", lo / hi, 5.0)]


def criterion_11(rng=None) -> list[Check]:
    q = 0.5
    params = DeformationParams(q)
    S = 200
    g = green_central(PHI_HALF, 0, S, params)
    out = []
    for name, xv in (("x=1", np.ones(S + 1)), ("x=G(I_0)", g.values)):
        b, _ = balayage(PHI_HALF, [0, 1], CentralElement(xv), params)
        v = b.values
        out.append(_ge(f"P_Y(x) <= x for {name}", float(np.min(xv - v)), -1e-9))
        out.append(_le(f"agreement on Y for {name}", float(np.max(np.abs(v[:2] - xv[:2]))), 1e-9))
        p40 = central_power_apply(PHI_HALF, 40, v, q, S - 40)
        out.append(_le(f"sup of P^40 P_Y(x) for {name}", float(np.max(np.abs(p40))), 1e-3))
    return out


def criterion_12(rng=None) -> list[Check]:
    q = 0.5
    k1 = zero_two_sequence(PHI_HALF, range(1, 11), 1, 240, q)
    k2 = zero_two_sequence(PHI_HALF, range(1, 201), 2, 240, q)
    rise = max(b - a for a, b in zip(k2, k2[1:]))
    return [
        _le("k=1 estimates equal 2 for n = 1..10", max(abs(v - 2.0) for v in k1), 1e-12),
        _le("k=2 estimates nonincreasing for n = 1..200", max(rise, 0.0), 1e-9),
        _le("k=2 estimate at n=200", k2[-1], 1e-2, "decays like 1.2/sqrt(n)"),
    ]


def criterion_13(rng=None) -> list[Check]:
    K, hw = martin_central(PHI_HALF, 1, 60, DeformationParams(0.5))
    v60, v59 = K.values[60], K.values[59]
    return [
        _le("|K(s=30) - K(s=29.5)|", abs(v60 - v59) + hw[60] + hw[59], 1e-3),
        _le("K(s=30) relative to 6.25", abs(v60 / 6.25 - 1.0) + hw[60] / 6.25, 0.01, f"value={v60!r}"),
    ]


ACCEPTANCE: dict[int, tuple[str, Callable]] = {
    1: ("Green ratio tends to q^2", criterion_1),
    2: ("Green asymptotic constant", criterion_2),
    3: ("renewal inversion", criterion_3),
    4: ("geometric transience bound", criterion_4),
    5: ("Podles suite", criterion_5),
    6: ("Clebsch-Gordan suite", criterion_6),
    7: ("Haar duality", criterion_7),
    8: ("boundary polynomial identity", criterion_8),
    9: ("boundary convergence", criterion_9),
    10: ("independence of phi", criterion_10),
    11: ("balayage", criterion_11),
    12: ("0-2 law", criterion_12),
    13: ("central Martin limit", criterion_13),
}


def criterion_result(number: int, seed: int = 42) -> tuple[bool, list[Check]]:
    """Run one acceptance criterion; it passes iff all of its checks pass."""
    _, fn = ACCEPTANCE[number]
    checks = fn(np.random.default_rng(seed))
    return all(c.passed for c in checks), checks


def run_suite(name: str, q: float, seed: int = 42) -> list[Check]:
    """Run an invariant suite by name, ``"all"`` for every invariant suite, or ``"acceptance"``."""
    rng = np.random.default_rng(seed)
    if name == "acceptance":
        out = []
        for number, (title, _) in ACCEPTANCE.items():
            ok, checks = criterion_result(number, seed)
            out.extend(Check(f"criterion {number} ({title}): {c.name}", c.passed, c.value, c.threshold, c.detail)
                       for c in checks)
        return out
    names = list(INVARIANT_SUITES) if name == "all" else [name]
    out = []
    for n in names:
        if n not in INVARIANT_SUITES:
            raise KeyError(n)
        out.extend(Check(f"{n}: {c.name}", c.passed, c.value, c.threshold, c.detail)
                   for c in INVARIANT_SUITES[n](q, rng))
    return out
