import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from suq2martin.central import (
    CentralElement,
    asymptotic_report,
    balayage,
    central_apply,
    central_power_apply,
    convolution_powers,
    decay_rate,
    green_central,
    kernel_rows,
    martin_central,
    mu_powers,
    path_probability,
    renewal_sequence,
    solve_delta,
    transition_kernel,
    zero_two_estimate,
    zero_two_sequence,
)
from suq2martin.exceptions import InputError, TransienceError
from suq2martin.fusion import DeformationParams, WeightFunctional, weight_product

HALF = WeightFunctional.state(1)
MIXED = WeightFunctional({1: 0.5, 2: 0.5})
P05 = DeformationParams(0.5)


def qdim(n, q):
    return sum(q ** (n - 2 * k) for k in range(n + 1))


def dense_kernel(phi, L, q):
    """Transition matrix on labels 0..L-1 from p(s,t) = sum_r lambda_r N^t_{rs} d_t / (d_r d_s)."""
    d = np.array([qdim(n, q) for n in range(L + max(phi.weights))])
    P = np.zeros((L, L))
    for r, lam in phi.weights.items():
        for s in range(L):
            for t in range(abs(r - s), min(r + s, L - 1) + 1, 2):
                P[s, t] += lam * d[t] / (d[r] * d[s])
    return P


def dense_green(phi, t, L, N, q):
    P = dense_kernel(phi, L, q)
    col = np.zeros(L)
    col[t] = 1.0
    total = col.copy()
    for _ in range(N):
        col = P @ col
        total += col
    return total


def test_transition_kernel_examples():
    assert transition_kernel(HALF, 1, 0, 0.5) == pytest.approx(0.16, rel=1e-14)
    assert transition_kernel(HALF, 1, 2, 0.5) == pytest.approx(0.84, rel=1e-14)
    for t in range(6):
        assert transition_kernel(MIXED, 0, t, 0.5) == MIXED.get(t)


@settings(max_examples=30)
@given(st.floats(min_value=0.1, max_value=0.9))
def test_transition_kernel_matches_dense_oracle(q):
    phi = WeightFunctional({1: 0.2, 3: 0.5, 4: 0.3})
    P = dense_kernel(phi, 30, q)
    for s in range(20):
        for t in range(20):
            assert transition_kernel(phi, s, t, q) == pytest.approx(P[s, t], rel=1e-12, abs=1e-300)


def test_convolution_powers():
    powers = convolution_powers(HALF, 5, 0.5)
    assert dict(powers[0].weights) == {0: 1.0}
    assert dict(powers[2].weights) == pytest.approx(dict(weight_product(HALF, HALF, 0.5).weights), rel=1e-14)
    for n, p in enumerate(powers):
        assert all(s % 2 == n % 2 for s in p.weights)
        assert p.norm == pytest.approx(1.0, rel=1e-13)


def test_path_probability():
    assert path_probability(HALF, [1], 0.5) == 1.0
    assert path_probability(HALF, [1, 0], 0.5) == pytest.approx(0.16, rel=1e-14)
    assert path_probability(HALF, [1, 1], 0.5) == 0.0
    assert path_probability(HALF, [1, 2, 5], 0.5) == 0.0


def test_decay_rate():
    assert decay_rate(HALF, 0.5) == pytest.approx(0.8, rel=1e-15)
    assert decay_rate(WeightFunctional.state(0), 0.5) == 1.0
    assert decay_rate(MIXED, 0.5) == pytest.approx(0.5 * 2 / 2.5 + 0.5 * 3 / 5.25, rel=1e-14)
    assert decay_rate(MIXED, 0.5) == pytest.approx(0.685714, abs=1e-6)


def test_mu_based_kernel_rows_match_dense_powers():
    phi = WeightFunctional({1: 0.2, 3: 0.5, 4: 0.3})
    q = 0.4
    P = dense_kernel(phi, 80, q)
    Pn = np.eye(80)
    for n, mu in zip(range(8), mu_powers(phi, q)):
        rows = kernel_rows(mu, 15, 15, q)
        assert np.allclose(rows, Pn[:16, :16], rtol=1e-11, atol=1e-300)
        Pn = Pn @ P


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("t", [0, 1, 3])
def test_green_against_dense_series(q, t):
    lam = decay_rate(HALF, q)
    N = int(math.log(1e-12) / math.log(lam)) + 1
    L = 20 + N + 5
    oracle = dense_green(HALF, t, L, N, q)[:21]
    table = green_central(HALF, t, 20, DeformationParams(q))
    # oracle tail at N terms is covered by the same geometric bound at N
    factor = np.array([qdim(t, q) * (s + 1) / (qdim(s, q) * (t + 1)) for s in range(21)])
    oracle_tail = factor * lam ** (N + 1) / (1 - lam)
    assert np.all(np.abs(table.values - oracle) <= table.tail_bounds + oracle_tail + 1e-13 * oracle)


def test_green_tail_bound_covers_longer_run():
    coarse = green_central(MIXED, 0, 25, P05)
    fine = green_central(MIXED, 0, 25, P05.replace(tol_tail=1e-13))
    assert np.all(np.abs(fine.values - coarse.values) <= coarse.tail_bounds)
    assert np.all(coarse.tail_bounds <= P05.tol_tail)
    assert len(list(coarse.rows())) == 26


def test_green_identity_and_renewal_equation():
    q = 0.5
    phi = WeightFunctional({1: 0.3, 2: 0.7})
    tight = P05.replace(tol_tail=1e-13)
    g0 = green_central(phi, 0, 30, tight).values
    for t in (1, 2, 5):
        gt = green_central(phi, t, 20, tight)
        for s in range(21):
            expect = sum(g0[r] * qdim(r, q) for r in range(abs(s - t), s + t + 1, 2)) * qdim(t, q) / qdim(s, q)
            assert gt.values[s] == pytest.approx(expect, rel=1e-10)
    g = green_central(phi, 2, 40, tight).values
    P = dense_kernel(phi, 41, q)
    for s in range(30):
        assert g[s] == pytest.approx((s == 2) + P[s] @ g, rel=1e-10)


def test_green_rejects_recurrent_functional():
    with pytest.raises(TransienceError):
        green_central(WeightFunctional.state(0), 0, 5, P05)


def test_renewal_sequence():
    p = renewal_sequence(HALF, 0.5)
    assert p[-1] == pytest.approx(0.8, rel=1e-15)
    assert p[1] == pytest.approx(0.2, rel=1e-15)
    phi = WeightFunctional({1: 0.2, 3: 0.5, 4: 0.3})
    assert math.fsum(renewal_sequence(phi, 0.3).values()) == pytest.approx(phi.norm, rel=1e-14)
    assert math.fsum(renewal_sequence(phi.scaled(0.7), 0.3).values()) == pytest.approx(0.7, rel=1e-14)


def test_solve_delta_states_and_scaled():
    data = solve_delta(HALF, 0.5)
    assert data.delta == 0.0
    assert data.lambda_phi == pytest.approx(-0.6, rel=1e-14)
    scaled = solve_delta(HALF.scaled(0.5), 0.5)
    closed = math.log((5 - math.sqrt(21)) / 2, 0.5) - 1
    assert scaled.delta == pytest.approx(closed, rel=1e-10)
    assert closed == pytest.approx(1.2604, abs=1e-4)
    tilted = math.fsum(0.5 ** (n * scaled.delta) * v for n, v in scaled.p.items())
    assert tilted == pytest.approx(1.0, abs=1e-12)
    assert scaled.lambda_phi < 0
    with pytest.raises(InputError):
        solve_delta(WeightFunctional.state(2), 0.5)


def test_asymptotic_report_state():
    report = asymptotic_report(HALF, 60, P05.replace(tol_tail=1e-10), rel_tail=1e-10)
    row = report[60]
    assert abs(row["ratio"] - 0.25) <= 5e-3
    assert row["constant"] == pytest.approx(1.25, rel=1e-2)
    assert row["tail_bound"] <= 1e-10


def test_martin_central():
    K0, hw0 = martin_central(HALF, 0, 20, P05)
    assert np.all(K0.values == 1.0)
    K1, hw1 = martin_central(HALF, 1, 60, P05)
    assert K1.values[60] == pytest.approx(6.25, rel=1e-2)
    assert abs(K1.values[60] - K1.values[59]) <= 1e-3
    # half-widths are relative to the kernel value
    assert np.all(hw1 <= P05.tol_tail * K1.values)


def test_central_apply_matches_dense():
    q = 0.5
    x = np.linspace(1.0, 2.0, 40)
    P = dense_kernel(MIXED, 40, q)
    Px = central_apply(MIXED, x, q, 30)
    assert np.allclose(Px, (P @ x)[:30], rtol=1e-13)
    P5x = central_power_apply(MIXED, 5, x, q, 20)
    assert np.allclose(P5x, (np.linalg.matrix_power(P, 5) @ x)[:20], rtol=1e-12)


def test_balayage_constant_and_potential():
    S = 120
    one = CentralElement.constant(1.0, S)
    b, _ = balayage(HALF, [0, 1], one, P05)
    assert np.all(b.values <= 1.0 + 1e-12)
    assert b.values[:2] == pytest.approx([1.0, 1.0], abs=1e-12)
    assert np.max(central_power_apply(HALF, 40, b.values, 0.5, S - 40)) <= 1e-3
    g = green_central(HALF, 0, S, P05).values
    bg, _ = balayage(HALF, [0, 1], CentralElement(g), P05)
    # the truncated Green function is superharmonic only up to its tail bound
    assert np.all(bg.values <= g + 1e-9)
    assert bg.values[:2] == pytest.approx(g[:2], rel=1e-12)


def test_balayage_is_hitting_probability():
    # P_Y(1)(s) is the probability of ever visiting Y = {0}; compare with a
    # dense absorbing-chain solve
    q, S = 0.5, 60
    b, _ = balayage(HALF, [0], CentralElement.constant(1.0, S), P05)
    L = 200
    P = dense_kernel(HALF, L, q)
    A = np.eye(L - 1) - P[1:, 1:]
    h = np.linalg.solve(A, P[1:, 0])
    assert b.values[0] == 1.0
    assert np.all(np.abs(b.values[1:S + 1] - h[:S]) <= P05.tol_tail)
    assert np.all(b.values[1:S + 1] <= h[:S] + 1e-15)


def test_zero_two():
    k1 = zero_two_sequence(HALF, range(1, 11), 1, 40, 0.5)
    assert max(abs(v - 2.0) for v in k1) <= 1e-12
    k2 = zero_two_sequence(HALF, range(1, 61), 2, 40, 0.5)
    assert all(b <= a + 1e-9 for a, b in zip(k2, k2[1:]))
    assert zero_two_estimate(HALF, 7, 2, 40, 0.5) == pytest.approx(k2[6], rel=1e-14)


def test_zero_two_matches_dict_route():
    # at s = 0 the row is the total variation between two convolution powers
    powers = convolution_powers(HALF, 12, 0.5)
    for n in (3, 10):
        a, b = powers[n], powers[n + 2]
        tv = sum(abs(a.get(s) - b.get(s)) for s in set(a.weights) | set(b.weights))
        assert zero_two_estimate(HALF, n, 2, 0, 0.5) == pytest.approx(tv, rel=1e-12)
