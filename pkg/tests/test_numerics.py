import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paramcmp.errors import CollinearityError
from paramcmp.numerics import (
    chi2_sf,
    f_sf,
    invert_spd,
    normal_sf2,
    regularized_beta,
    regularized_gamma_q,
    replicate_rng,
    seeded_rng,
    solve_least_squares,
    student_t_sf2,
)


def gauss_solve(A, b):
    """Hand-rolled Gaussian elimination with partial pivoting (test oracle)."""
    A = [list(map(float, row)) for row in A]
    b = list(map(float, b))
    n = len(b)
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(A[r][col]))
        A[col], A[piv] = A[piv], A[col]
        b[col], b[piv] = b[piv], b[col]
        for r in range(col + 1, n):
            f = A[r][col] / A[col][col]
            for c in range(col, n):
                A[r][c] -= f * A[col][c]
            b[r] -= f * b[col]
    x = [0.0] * n
    for r in reversed(range(n)):
        x[r] = (b[r] - sum(A[r][c] * x[c] for c in range(r + 1, n))) / A[r][r]
    return np.array(x)


def normal_eq_oracle(X, y):
    XtX = [[sum(X[i][a] * X[i][b] for i in range(len(X))) for b in range(len(X[0]))]
           for a in range(len(X[0]))]
    Xty = [sum(X[i][a] * y[i] for i in range(len(X))) for a in range(len(X[0]))]
    return gauss_solve(XtX, Xty)


def erf_series(x, terms=80):
    total = 0.0
    for n in range(terms):
        total += (-1) ** n * x ** (2 * n + 1) / (math.factorial(n) * (2 * n + 1))
    return 2.0 / math.sqrt(math.pi) * total


class TestLeastSquares:
    def test_perfect_fit(self):
        X = np.array([[1.0, 1.0], [2.0, 1.0], [3.0, 1.0]])
        beta, XtX_inv = solve_least_squares(X, np.array([3.0, 5.0, 7.0]))
        np.testing.assert_allclose(beta, [2.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(XtX_inv @ (X.T @ X), np.eye(2), atol=1e-12)

    def test_duplicated_column(self):
        X = np.column_stack([np.arange(5.0), np.arange(5.0), np.ones(5)])
        with pytest.raises(CollinearityError) as info:
            solve_least_squares(X, np.arange(5.0), ["a", "b", "_cons"])
        assert info.value.column == "b"
        assert "b" in str(info.value)

    def test_zero_column(self):
        X = np.column_stack([np.zeros(4), np.ones(4)])
        with pytest.raises(CollinearityError):
            solve_least_squares(X, np.arange(4.0))

    def test_random_6x3_matches_elimination(self, rng):
        X = rng.normal(size=(6, 3))
        y = rng.normal(size=6)
        beta, _ = solve_least_squares(X, y)
        np.testing.assert_allclose(beta, normal_eq_oracle(X, y), rtol=0, atol=1e-9)

    def test_normal_equations_residual(self, rng):
        X = np.column_stack([rng.normal(size=(40, 3)) * [1, 100, 1e-3], np.ones(40)])
        y = rng.normal(size=40)
        beta, _ = solve_least_squares(X, y)
        Xty = X.T @ y
        assert np.max(np.abs(X.T @ (y - X @ beta))) <= 1e-8 * np.max(np.abs(Xty))


class TestInvertSpd:
    def test_identity(self):
        inv, rank = invert_spd(np.eye(3))
        np.testing.assert_allclose(inv, np.eye(3))
        assert rank == 3

    def test_diagonal(self):
        inv, _ = invert_spd(np.diag([4.0, 9.0]))
        np.testing.assert_allclose(inv, np.diag([0.25, 1 / 9]), rtol=1e-15)

    def test_closed_form_2x2(self):
        A = np.array([[2.0, 1.0], [1.0, 2.0]])
        inv, _ = invert_spd(A)
        np.testing.assert_allclose(inv, [[2 / 3, -1 / 3], [-1 / 3, 2 / 3]], atol=1e-15)
        np.testing.assert_allclose(A @ inv, np.eye(2), atol=1e-12)

    def test_singular_falls_back_to_pseudo_inverse(self):
        v = np.array([1.0, 2.0, 2.0])
        A = np.outer(v, v)
        inv, rank = invert_spd(A)
        assert rank == 1
        np.testing.assert_allclose(A @ inv @ A, A, atol=1e-10)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            invert_spd(np.array([[1.0, 2.0], [0.0, 1.0]]))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=6))
    def test_inverse_property(self, seed, p):
        r = np.random.default_rng(seed)
        Q, _ = np.linalg.qr(r.normal(size=(p, p)))
        evals = np.exp(r.uniform(0, np.log(1e6), size=p))  # condition < 1e8
        A = (Q * evals) @ Q.T
        A = 0.5 * (A + A.T)
        inv, rank = invert_spd(A)
        assert rank == p
        np.testing.assert_allclose(inv @ A, np.eye(p), atol=1e-8)


class TestTails:
    def test_t_at_zero(self):
        for df in (1, 2.5, 46, 1e6):
            assert student_t_sf2(0.0, df) == 1.0

    def test_cauchy_quartile(self):
        assert student_t_sf2(1.0, 1) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0, 7.5, 40.0])
    def test_cauchy_closed_form(self, t):
        assert student_t_sf2(t, 1) == pytest.approx(1 - 2 / math.pi * math.atan(t), abs=1e-12)

    @pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0, 7.5, 40.0])
    def test_df2_closed_form(self, t):
        assert student_t_sf2(t, 2) == pytest.approx(1 - t / math.sqrt(2 + t * t), abs=1e-12)

    def test_poverty_row_min_df(self):
        # df=46 value
        assert student_t_sf2(2.1571, 46) == pytest.approx(0.0363, abs=5e-5)

    def test_domain(self):
        with pytest.raises(ValueError):
            student_t_sf2(1.0, 0)
        with pytest.raises(ValueError):
            chi2_sf(-1.0, 2)

    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 3.0])
    def test_t_tends_to_normal(self, t):
        assert student_t_sf2(t, 1e6) == pytest.approx(normal_sf2(t), abs=1e-6)

    def test_chi2_zero(self):
        assert chi2_sf(0.0, 3) == 1.0

    @pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 2.3304, 10.0, 60.0])
    def test_chi2_df2_exponential(self, x):
        assert chi2_sf(x, 2) == pytest.approx(math.exp(-x / 2), abs=1e-12)

    @pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 7.0, 30.0])
    def test_chi2_df4_closed_form(self, x):
        assert chi2_sf(x, 4) == pytest.approx(math.exp(-x / 2) * (1 + x / 2), abs=1e-12)

    def test_chi2_fe_re_value(self):
        assert chi2_sf(2.3304, 2) == pytest.approx(0.3119, abs=5e-5)

    @pytest.mark.parametrize("x", [0.04, 0.5, 1.0, 4.0, 9.0, 25.0])
    def test_chi2_df1_equals_normal_square(self, x):
        assert chi2_sf(x, 1) == pytest.approx(student_t_sf2(math.sqrt(x), math.inf), abs=1e-9)

    def test_chi2_monotone(self):
        xs = np.linspace(0, 40, 401)
        vals = [chi2_sf(x, 3) for x in xs]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_normal(self):
        assert normal_sf2(0.0) == 1.0
        assert normal_sf2(0.0216) == pytest.approx(0.9828, abs=5e-5)
        assert normal_sf2(1.959964) == pytest.approx(0.05, abs=1e-6)

    @pytest.mark.parametrize("z", [0.0216, 0.5, 1.0, 1.959964, 3.0])
    def test_normal_against_erf_series(self, z):
        assert normal_sf2(z) == pytest.approx(1 - erf_series(z / math.sqrt(2)), abs=1e-12)

    def test_f_against_t(self):
        # F(1, d) is t^2 on d df
        for t, d in [(0.7, 5), (2.0, 30), (3.3, 188)]:
            assert f_sf(t * t, 1, d) == pytest.approx(student_t_sf2(t, d), abs=1e-12)

    def test_special_functions_against_scipy(self):
        sp = pytest.importorskip("scipy.special")
        r = np.random.default_rng(7)
        for _ in range(200):
            a, b = r.uniform(0.05, 60, size=2)
            x = r.uniform(0, 1)
            assert regularized_beta(a, b, x) == pytest.approx(sp.betainc(a, b, x), abs=1e-12)
            g = r.uniform(0, 100)
            assert regularized_gamma_q(a, g) == pytest.approx(sp.gammaincc(a, g), abs=1e-12)


class TestRng:
    def test_same_seed_same_stream(self):
        a = seeded_rng(42).random(1000)
        b = seeded_rng(42).random(1000)
        assert np.array_equal(a, b)

    def test_neighbouring_seeds_differ(self):
        a = seeded_rng(42).random(10)
        b = seeded_rng(43).random(10)
        assert np.all(a != b)

    def test_mean(self):
        assert abs(seeded_rng(2024).random(100_000).mean() - 0.5) < 0.01

    def test_replicate_streams_independent_of_order(self):
        first = [replicate_rng(9, i).random(3) for i in range(5)]
        second = [replicate_rng(9, i).random(3) for i in reversed(range(5))][::-1]
        assert all(np.array_equal(a, b) for a, b in zip(first, second))
        assert not np.array_equal(first[0], first[1])

    def test_pinned_first_draws(self):
        # PCG64 via SeedSequence is specified by numpy and platform independent
        draws = seeded_rng(0).random(3)
        np.testing.assert_array_equal(draws, np.random.Generator(np.random.PCG64(0)).random(3))
