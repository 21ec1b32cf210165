import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from suq2martin.blocks import BlockElement, adjoint_action, haar_pairing, op_norm
from suq2martin.central import green_central, transition_kernel
from suq2martin.exceptions import InputError
from suq2martin.fusion import DeformationParams, WeightFunctional
from suq2martin.martin import (
    boundary_deviation,
    boundary_polynomial,
    boundary_values,
    duality_residual,
    fourier_alpha_power,
    green_block,
    harmonic_residual,
    leading_coefficient,
    markov_step,
    martin_apply,
    martin_gap,
    tilde_polynomial,
)

HALF = WeightFunctional.state(1)
MIXED = WeightFunctional({1: 0.5, 2: 0.3, 3: 0.2})
P05 = DeformationParams(0.5)


# ---------------------------------------------------------------------------
# oracles


def qnum(n, q):
    return (q**n - q**-n) / (q - 1 / q)


def qdim(n, q):
    return qnum(n + 1, q)


def rep(n, q):
    s = n / 2
    idx = [-s + k for k in range(n + 1)]
    E = np.zeros((n + 1, n + 1))
    for a in range(1, n + 1):
        E[a - 1, a] = math.sqrt(qnum(s + idx[a], q) * qnum(s - idx[a] + 1, q))
    return E, np.diag([q ** (-i) for i in idx])


def oracle_cg(r, t, w, q):
    """CG isometry from the null space of the dense coproduct of e on the top weight space."""
    Er, Kr = rep(r, q)
    Et, Kt = rep(t, q)
    De = np.kron(Er, np.linalg.inv(Kt)) + np.kron(Kr, Et)
    Df = np.kron(Er.T, np.linalg.inv(Kt)) + np.kron(Kr, Et.T)
    weight = np.array([(2 * a - r) + (2 * b - t) for a in range(r + 1) for b in range(t + 1)])
    cols = np.flatnonzero(weight == -w)
    ns = scipy.linalg.null_space(De[:, cols])
    assert ns.shape[1] == 1
    v = np.zeros((r + 1) * (t + 1))
    v[cols] = ns[:, 0]
    v *= np.sign(v[np.flatnonzero(np.abs(v) > 1e-12)[0]])
    V = [v]
    for m2 in range(-w, w, 2):
        u = Df @ V[-1]
        V.append(u / np.linalg.norm(u))
    return np.stack(V, axis=1)


def oracle_markov(phi, x, q, out_labels):
    """P_phi(x)_t = sum_r lambda_r / d_r sum_w Tr_1((K_r^2 (x) 1) V x_w V^T)."""
    out = {}
    for t in out_labels:
        acc = np.zeros((t + 1, t + 1))
        for r, lam in phi.weights.items():
            Kr2 = rep(r, q)[1] ** 2
            for w in range(abs(r - t), r + t + 1, 2):
                if w not in x.blocks:
                    continue
                V = oracle_cg(r, t, w, q)
                M = (V @ x.blocks[w] @ V.T).reshape(r + 1, t + 1, r + 1, t + 1)
                # Tr_1((K^2 (x) 1) M)[b, d] = sum_{a, c} K^2[a, c] M[c, b, a, d]
                acc += lam / qdim(r, q) * np.einsum("ac,cbad->bd", Kr2, M)
        out[t] = acc
    return out


def exact_recurrence(n, q, c):
    """Ascending Fraction coefficients of p_n from p_{k+1}(x) = c x p_k(x) - c^-1 (x - 1) p_k(q^-2 x)."""
    p = [Fraction(1)]
    for _ in range(n):
        scaled = [a * q ** (-2 * i) for i, a in enumerate(p)]
        nxt = [Fraction(0)] * (len(p) + 1)
        for i, a in enumerate(p):
            nxt[i + 1] += c * a
        for i, a in enumerate(scaled):
            nxt[i + 1] -= a / c
            nxt[i] += a / c
        p = nxt
    return p


# ---------------------------------------------------------------------------
# markov_step


def test_markov_step_unit_example():
    q = 0.5
    for s in range(1, 5):
        out = markov_step(WeightFunctional.state(s), BlockElement.unit([0]), q)
        assert out.labels == (s,)
        assert np.allclose(out.block(s), np.eye(s + 1) / qdim(s, q) ** 2, rtol=1e-13)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
def test_markov_step_on_central_elements(q):
    for t in range(6):
        out = markov_step(MIXED, BlockElement.unit([t]), q)
        for s, b in out.blocks.items():
            assert np.allclose(b, transition_kernel(MIXED, s, t, q) * np.eye(s + 1), rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
def test_markov_step_matches_dense_oracle(q):
    rng = np.random.default_rng(7)
    x = BlockElement({n: rng.standard_normal((n + 1, n + 1)) for n in (0, 2, 3, 5)})
    phi = WeightFunctional({1: 0.6, 2: 0.4})
    out = markov_step(phi, x, q)
    oracle = oracle_markov(phi, x, q, out.labels)
    for t in out.labels:
        assert np.allclose(out.block(t), oracle[t], rtol=1e-10, atol=1e-12 * max(1.0, op_norm(oracle[t])))


def test_markov_step_unital_and_positive():
    q = 0.5
    unit = BlockElement({0: np.eye(1)}, cutoff=0, fill=1.0)
    assert harmonic_residual(MIXED, unit, 10, q) <= 1e-12
    assert harmonic_residual(MIXED.scaled(0.9), unit, 10, q) == pytest.approx(0.1, abs=1e-12)
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = {n: rng.standard_normal((n + 1, n + 1)) for n in range(6)}
        x = BlockElement({n: b @ b.T for n, b in a.items()})
        for t, b in markov_step(MIXED, x, q).blocks.items():
            assert np.linalg.eigvalsh(b).min() >= -1e-10 * max(1.0, op_norm(b))


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.sampled_from([0.3, 0.5, 0.8]), st.sampled_from("efk"))
def test_markov_step_commutes_with_adjoint_action(seed, q, X):
    rng = np.random.default_rng(seed)
    y = BlockElement({n: rng.standard_normal((n + 1, n + 1)) for n in range(7)})
    a = markov_step(MIXED, adjoint_action(X, y, q), q)
    b = adjoint_action(X, markov_step(MIXED, y, q), q)
    for t in range(7):
        assert op_norm(a.block(t) - b.block(t)) <= 1e-9 * max(1.0, op_norm(b.block(t)))


# ---------------------------------------------------------------------------
# potentials and the Martin kernel


def test_green_block_central_consistency():
    for phi in (HALF, MIXED):
        bg = green_block(phi, BlockElement.unit([0]), 12, P05)
        gc = green_central(phi, 0, 12, P05)
        for t in range(13):
            assert np.allclose(bg.value.block(t), gc.values[t] * np.eye(t + 1), rtol=1e-10)
            assert bg.g0[t] == pytest.approx(gc.values[t], rel=1e-10)


def test_green_block_potential_equation_and_linearity():
    q = 0.5
    rng = np.random.default_rng(11)
    x = BlockElement({n: rng.standard_normal((n + 1, n + 1)) for n in (1, 2)})
    y = BlockElement({3: rng.standard_normal((4, 4))})
    r_max = 10
    gx = green_block(MIXED, x, r_max + 3, P05)
    # P(G~) - G~ + x = P^(N+1) x, bounded by the tail of the partial sum
    PG = markov_step(MIXED, gx.value, q, r_max=r_max)
    for t in range(r_max + 1):
        lhs = op_norm(PG.block(t) - gx.value.block(t) + x.block(t))
        assert lhs <= gx.tail_bounds[t] + 1e-12
    gy = green_block(MIXED, y, r_max, P05)
    gxy = green_block(MIXED, x + y, r_max, P05)
    gx = green_block(MIXED, x, r_max, P05)
    for t in range(r_max + 1):
        diff = op_norm(gxy.value.block(t) - gx.value.block(t) - gy.value.block(t))
        assert diff <= gxy.tail_bounds[t] + gx.tail_bounds[t] + gy.tail_bounds[t]


def test_harmonic_residual_of_potential():
    G = green_block(HALF, BlockElement.unit([0]), 16, P05.replace(tol_tail=1e-12))
    res = harmonic_residual(HALF, G.value, 14, 0.5)
    assert res == pytest.approx(1.0, abs=1e-9)


def test_martin_apply_unit_and_positivity():
    K, hw = martin_apply(HALF, BlockElement.unit([0]), 10, P05)
    for t in range(11):
        assert op_norm(K.block(t) - np.eye(t + 1)) <= hw[t] + 1e-14
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 3))
    x = BlockElement({2: a @ a.T})
    K, hw = martin_apply(MIXED, x, 10, P05)
    for t, b in K.blocks.items():
        assert np.linalg.eigvalsh(b).min() >= -hw[t] - 1e-12
    with pytest.raises(InputError):
        martin_apply(WeightFunctional.state(2), x, 5, P05)


def test_martin_apply_commutes_with_adjoint_action():
    q = 0.5
    rng = np.random.default_rng(9)
    y = BlockElement({n: rng.standard_normal((n + 1, n + 1)) for n in (1, 2)})
    for X in "efk":
        a, ha = martin_apply(MIXED, adjoint_action(X, y, q), 8, P05)
        b, hb = martin_apply(MIXED, y, 8, P05)
        b = adjoint_action(X, b, q)
        for t in range(9):
            assert op_norm(a.block(t) - b.block(t)) <= 1e-6 * max(1.0, op_norm(b.block(t)))


def test_fourier_alpha_power_examples():
    q = 0.5
    f0 = fourier_alpha_power(0, q)
    assert f0.labels == (0,) and f0.block(0)[0, 0] == 1.0
    f1 = fourier_alpha_power(1, q)
    assert f1.block(1)[0, 0] == pytest.approx(0.8, rel=1e-15)
    assert np.count_nonzero(f1.block(1)) == 1
    f2 = fourier_alpha_power(2, q)
    assert f2.block(2)[0, 0] == pytest.approx(4 / 5.25, rel=1e-15)


# ---------------------------------------------------------------------------
# boundary polynomials


def test_boundary_polynomial_examples():
    q = 0.5
    assert np.array_equal(boundary_polynomial(0, 0.25, q).coeffs, [1.0])
    p1 = boundary_polynomial(1, 0.25, q)
    assert np.allclose(p1.coeffs, [4.0, -3.75], rtol=1e-15)
    t1 = tilde_polynomial(1, q)
    assert np.allclose(t1.coeffs, [q**-2, q**2 - q**-2], rtol=1e-14)
    assert np.array_equal(tilde_polynomial(0, q).coeffs, [1.0])
    with pytest.raises(InputError):
        boundary_polynomial(2, 1.5, q)


@pytest.mark.parametrize("n", range(11))
def test_boundary_polynomial_against_exact_recurrence(n):
    q = Fraction(1, 2)
    exact = exact_recurrence(n, q, q * q)
    got = boundary_polynomial(n, 0.25, 0.5)
    assert got.degree == n
    for a, b in zip(got.coeffs, exact):
        assert a == pytest.approx(float(b), rel=1e-12, abs=0)
    tilde = tilde_polynomial(n, 0.5)
    for a, b in zip(tilde.coeffs, exact):
        assert a == pytest.approx(float(b), rel=1e-10, abs=0)
    assert leading_coefficient(n, 0.25, 0.5) == pytest.approx(float(exact[-1]), rel=1e-12)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
def test_boundary_values_pointwise(q):
    c = q * q
    for n in range(11):
        assert boundary_values(n, c, q, 1.0) == pytest.approx(c**n, rel=1e-12)
    # on mild arguments the coefficient form agrees with the pointwise form
    xs = np.linspace(0.0, 1.0, 7)
    for n in range(5):
        poly = boundary_polynomial(n, c, q)
        scale = np.abs(poly.coeffs).sum()
        assert np.allclose(boundary_values(n, c, q, xs), poly(xs), rtol=0, atol=1e-12 * scale)


def test_boundary_deviation_and_gap():
    rep0 = boundary_deviation(HALF, 0, range(0, 9), P05)
    assert all(row["D"] <= row["tail_bound"] + 1e-14 for row in rep0.rows)
    rep1 = boundary_deviation(HALF, 1, range(8, 25), P05)
    D = rep1.D()
    assert D[24] < 0.1 * D[8]
    with pytest.raises(InputError):
        boundary_deviation(HALF.scaled(0.5), 1, [4], P05)
    psi = WeightFunctional({1: 0.5, 2: 0.5})
    rows = {r["r2"]: r for r in martin_gap(HALF, psi, fourier_alpha_power(1, 0.5), [8, 24], P05)}
    assert rows[24]["value"] + rows[24]["tail_bound"] < 0.2 * (rows[8]["value"] - rows[8]["tail_bound"])


# ---------------------------------------------------------------------------
# duality


def test_duality_examples():
    q = 0.5
    x, y = BlockElement.unit([0]), BlockElement.unit([1])
    assert haar_pairing(markov_step(HALF, x, q), y, q) == pytest.approx(1.0, rel=1e-14)
    assert haar_pairing(x, markov_step(HALF, y, q), q) == pytest.approx(1.0, rel=1e-14)
    assert duality_residual(HALF, x, y, q) <= 1e-12
    assert haar_pairing(markov_step(HALF, x, q), x, q) == 0.0


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
def test_duality_random_pairs(q):
    rng = np.random.default_rng(42)
    for _ in range(50):
        x = BlockElement({n: rng.standard_normal((n + 1, n + 1)) for n in rng.choice(7, size=2, replace=False)})
        y = BlockElement({n: rng.standard_normal((n + 1, n + 1)) for n in rng.choice(7, size=2, replace=False)})
        lhs = haar_pairing(markov_step(MIXED, x, q), y, q)
        rhs = haar_pairing(x, markov_step(MIXED, y, q), q)
        assert duality_residual(MIXED, x, y, q) <= 1e-10 * max(1.0, abs(lhs), abs(rhs))
