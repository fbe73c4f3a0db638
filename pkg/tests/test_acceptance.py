"""Acceptance criteria, one test each. Run with ``pytest tests/test_acceptance.py``."""

import json
import math

import numpy as np
import pytest

from paramcmp.biastest import align, compare_fits, joint_bias_test, run_biastest, variable_bias_test
from paramcmp.cli import main
from paramcmp.estimators import EstimatorSpec, FitResult
from paramcmp.estimators.ols import fit_ols
from paramcmp.estimators.panel import fit_fe, fit_re
from paramcmp.estimators.quantile import fit_qreg, fit_qreg_bootstrap
from paramcmp.estimators.robust import fit_rreg
from paramcmp.numerics import chi2_sf, normal_sf2, solve_least_squares, student_t_sf2

from conftest import make_frame
from test_numerics import erf_series, gauss_solve


def rel(a, b):
    return abs(a - b) / abs(b)


def tabulated_fit(tag, names, b, se, n, df):
    return FitResult(tag, list(names), np.array(b, float), np.diag(np.array(se, float) ** 2), n, df)


def test_criterion_01_ols_golden(acceptance, crime3):
    res = fit_ols(crime3)
    table = [
        ("pctmetro", 11.92801, 1.75924),
        ("pcths", 26.86559, 10.31791),
        ("poverty", 76.86437, 12.60933),
        ("_cons", -3334.774, 946.0239),
    ]
    checks = []
    for name, b, se in table:
        checks.append((f"b({name})", rel(res.coef(name), b) <= 1e-4))
        checks.append((f"se({name})", rel(res.stderr(name), se) <= 1e-4))
    checks.append(("R2", abs(res.diagnostics["r2"] - 0.6428) <= 1e-4))
    checks.append(("F", abs(res.diagnostics["F"] - 28.20) <= 0.01))
    acceptance(1, "OLS crime coefficients, SEs, R2, F", checks)


@pytest.fixture(scope="module")
def grunfeld_pair(grunfeld, grunfeld_frame):
    return fit_fe(grunfeld_frame, grunfeld), fit_re(grunfeld_frame, grunfeld)


def test_criterion_02_fe_golden(acceptance, grunfeld_pair):
    fe, _ = grunfeld_pair
    checks = []
    for name, b, se in [
        ("mvalue", 0.1101238, 0.0118567),
        ("kstock", 0.3100653, 0.0173545),
        ("_cons", -58.74393, 12.45369),
    ]:
        checks.append((f"b({name})", rel(fe.coef(name), b) <= 1e-5))
        checks.append((f"se({name})", rel(fe.stderr(name), se) <= 1e-5))
    d = fe.diagnostics
    checks.append(("rho", abs(d["rho"] - 0.72525012) <= 1e-4))
    checks.append(("F(2,188)", (d["F_df1"], d["F_df2"]) == (2, 188) and abs(d["F"] - 309.01) <= 0.1))
    acceptance(2, "FE Grunfeld coefficients, SEs, rho, F", checks)


def test_criterion_03_re_golden(acceptance, grunfeld_pair):
    _, re = grunfeld_pair
    checks = [
        (f"b({name})", rel(re.coef(name), b) <= 1e-4)
        for name, b in [("mvalue", 0.1097811), ("kstock", 0.308113), ("_cons", -57.83441)]
    ]
    checks.append(("sigma_u", abs(re.diagnostics["sigma_u"] - 84.20095) <= 0.1))
    acceptance(3, "RE Grunfeld coefficients and Swamy-Arora sigma_u", checks)


def test_criterion_04_fe_re_variable_test(acceptance, grunfeld_pair):
    rows = compare_fits(*grunfeld_pair).rows
    checks = []
    for row, (diff, t, p) in zip(rows, [(0.0003, 0.0216, 0.9828), (0.0020, 0.0799, 0.9364)]):
        checks.append((f"diff({row.name})", abs(row.diff - diff) <= 1e-4))
        checks.append((f"t({row.name})", abs(row.t_stat - t) <= 0.002))
        checks.append((f"p({row.name})", abs(row.p_value - p) <= 0.002))
    acceptance(4, "FE vs RE per-variable diffs, t, p", checks)


def test_criterion_05_tabulated_crime_inputs(acceptance):
    names = ["pctmetro", "pcths", "poverty", "_cons"]
    m1 = tabulated_fit("ols", names, [11.92801, 26.86559, 76.86437, -3334.774],
                     [1.75924, 10.31791, 12.60933, 946.0239], 51, 47)
    m2 = tabulated_fit("rreg", names, [9.547002, 4.582318, 40.77088, -1000.856],
                     [1.378778, 8.272346, 10.99935, 780.8014], 50, 46)
    rows = variable_bias_test(align(m1, m2))
    expected = [(2.3810, 1.0652, 0.2922), (22.2833, 1.6850, 0.0986), (36.0935, 2.1571, 0.0361)]
    checks = []
    for row, (diff, t, p) in zip(rows, expected):
        checks.append((f"diff({row.name})", f"{row.diff:.4f}" == f"{diff:.4f}"))
        checks.append((f"t({row.name})", abs(row.t_stat - t) <= 5e-4))
        checks.append((f"p({row.name})", abs(row.p_value - p) <= 1e-3))
    acceptance(5, "per-variable test on tabulated OLS/rreg inputs, min-df rule", checks)


def test_criterion_06_quantile_golden(acceptance, crime2):
    res = fit_qreg(crime2)
    checks = []
    for name, b, se in [
        ("pctmetro", 9.532475, 2.071695),
        ("pcths", -19.27213, 8.134439),
        ("_cons", 1413.812, 637.6934),
    ]:
        checks.append((f"b({name})", rel(res.coef(name), b) <= 1e-3))
        checks.append((f"se({name})", rel(res.stderr(name), se) <= 0.10))
    checks.append(("pseudo R2", abs(res.diagnostics["pseudo_r2"] - 0.2979) <= 1e-3))
    names = ["pctmetro", "pcths", "_cons"]
    m1 = tabulated_fit("rreg", names, [8.623612, -18.21422, 1376.441], [1.530345, 6.008845, 471.059], 50, 47)
    m2 = tabulated_fit("qreg", names, [9.532475, -19.27213, 1413.812], [2.071695, 8.134439, 637.6934], 51, 48)
    rows = variable_bias_test(align(m1, m2))
    checks.append(("t(pctmetro)", abs(rows[0].t_stat - (-0.3529)) <= 0.01))
    checks.append(("t(pcths)", abs(rows[1].t_stat - 0.1046) <= 0.01))
    acceptance(6, "median regression estimates, pseudo R2, SEs, tabulated-input t", checks)


def test_criterion_07_engel_quantiles(acceptance, engel_frame):
    s1 = EstimatorSpec(kind="qreg_bootstrap", q=0.25, reps=100, seed=12345)
    s2 = s1.with_(q=0.75)
    f1, f2 = fit_qreg_bootstrap(engel_frame, s1), fit_qreg_bootstrap(engel_frame, s2)
    diff = compare_fits(f1, f2).rows[0].diff
    checks = [
        ("b(q25)", rel(f1.coef("income"), 0.4741032) <= 1e-3),
        ("b(q75)", rel(f2.coef("income"), 0.6440143) <= 1e-3),
        ("diff", abs(diff - (-0.1699)) <= 1e-3),
        ("se(q25) band", 0.5 <= f1.stderr("income") / 0.0383497 <= 1.5),
        ("se(q75) band", 0.5 <= f2.stderr("income") / 0.0319918 <= 1.5),
    ]
    acceptance(7, "Engel q=.25/.75 estimates, diff, bootstrap SE bands", checks)


def test_criterion_08_rreg(acceptance, crime3):
    res = fit_rreg(crime3)
    checks = [("n_obs == 50", res.n_obs == 50)]
    for name, b in [("pctmetro", 9.547002), ("pcths", 4.582318), ("poverty", 40.77088)]:
        checks.append((f"b({name}) within 5%", rel(res.coef(name), b) <= 0.05))
    acceptance(8, "rreg Cook screen and coefficients", checks)


def _random_ols_pair(r, n=40):
    x1, x2 = r.normal(size=(2, n))
    y1 = 1 + x1 - x2 + r.normal(size=n)
    y2 = 1 + 1.2 * x1 - x2 + r.normal(size=n)
    return (x1, x2, y1, y2)


def test_criterion_09_joint_properties(acceptance):
    r = np.random.default_rng(9)
    identical, antisym, scale = True, True, True
    for _ in range(100):
        x1, x2, y1, y2 = _random_ols_pair(r)
        f1, f2 = fit_ols(make_frame(y1, x1, x2)), fit_ols(make_frame(y2, x1, x2))
        same = compare_fits(f1, f1)
        identical &= same.chi2 == 0.0 and same.p_chi2 == 1.0
        a, b = compare_fits(f1, f2), compare_fits(f2, f1)
        antisym &= all(
            ra.diff == -rb.diff and abs(ra.t_stat + rb.t_stat) <= 1e-12 and abs(ra.p_value - rb.p_value) <= 1e-12
            for ra, rb in zip(a.rows, b.rows)
        ) and abs(a.chi2 - b.chi2) <= 1e-12 * max(1.0, a.chi2)
        c = float(np.exp(r.uniform(-3, 3)))
        s = compare_fits(fit_ols(make_frame(y1, c * x1, x2)), fit_ols(make_frame(y2, c * x1, x2)))
        scale &= (
            abs(s.rows[0].diff * c - a.rows[0].diff) <= 1e-8 * abs(a.rows[0].diff)
            and abs(s.rows[0].t_stat - a.rows[0].t_stat) <= 1e-8 * max(1.0, abs(a.rows[0].t_stat))
            and abs(s.chi2 - a.chi2) <= 1e-8 * max(1.0, a.chi2)
        )
    m1 = tabulated_fit("ols", ["x", "_cons"], [1.7, 0.0], [0.3, 1.0], 30, 28)
    m2 = tabulated_fit("ols", ["x", "_cons"], [0.9, 5.0], [0.4, 2.0], 30, 28)
    pair = align(m1, m2)
    scalar = abs(joint_bias_test(pair).chi2 - variable_bias_test(pair)[0].t_stat ** 2) <= 1e-10
    acceptance(9, "joint test identity, scalar chi2 = t^2, antisymmetry, scale equivariance", [
        ("identical fits", identical),
        ("chi2 = t^2", scalar),
        ("antisymmetry", antisym),
        ("scale equivariance", scale),
    ])


def test_criterion_10_fe_re_joint(acceptance, grunfeld, grunfeld_pair):
    fe, re = grunfeld_pair
    # brute-force oracle on the fitted slope blocks
    d = fe.beta[:2] - re.beta[:2]
    V1, V2 = fe.vcov[:2, :2], re.vcov[:2, :2]
    sum_form = float(d @ np.linalg.inv(V1 + V2) @ d)
    diff_form = float(d @ np.linalg.inv(V1 - V2) @ d)
    matches = {name: abs(v - 2.3304) <= 0.05 for name, v in [("sum", sum_form), ("difference", diff_form)]}
    print(f"  oracle: sum form {sum_form:.6f}, difference form {diff_form:.6f}")

    runs = [run_biastest(grunfeld, "invest", ["mvalue", "kstock"], None,
                         EstimatorSpec(kind="fe"), EstimatorSpec(kind="re")) for _ in range(2)]
    hausman = run_biastest(grunfeld, "invest", ["mvalue", "kstock"], None,
                           EstimatorSpec(kind="fe"), EstimatorSpec(kind="re"), "difference")
    acceptance(10, "FE vs RE joint statistic: reference 2.3304 is the difference form", [
        ("implementation equals sum-form oracle", abs(runs[0].chi2 - sum_form) <= 1e-9 * max(1, sum_form)),
        ("sum form stable to 1e-6", abs(runs[0].chi2 - runs[1].chi2) <= 1e-6),
        ("difference form matches 2.3304 +/- 0.05", matches["difference"]),
        ("difference diagnostic reproduces it", abs(hausman.chi2 - 2.3304) <= 0.05 and hausman.df_chi2 == 2),
        ("difference p matches 0.3119", abs(hausman.p_chi2 - 0.3119) <= 0.005),
    ])


def test_criterion_11_numerics(acceptance):
    checks = []
    ts = [0.05, 0.3, 1.0, 2.5, 10.0, 100.0]
    checks.append(("Cauchy", all(abs(student_t_sf2(t, 1) - (1 - 2 / math.pi * math.atan(t))) <= 1e-9 for t in ts)))
    checks.append(("t df=2", all(abs(student_t_sf2(t, 2) - (1 - t / math.sqrt(2 + t * t))) <= 1e-9 for t in ts)))
    xs = [0.01, 0.5, 2.3304, 10.0, 50.0]
    checks.append(("chi2 df=2", all(abs(chi2_sf(x, 2) - math.exp(-x / 2)) <= 1e-9 for x in xs)))
    checks.append(("chi2 df=1 erfc", all(abs(chi2_sf(x, 1) - math.erfc(math.sqrt(x / 2))) <= 1e-9 for x in xs)))
    zs = [0.0216, 0.5, 1.959964, 3.0]
    checks.append(("normal erf series", all(abs(normal_sf2(z) - (1 - erf_series(z / math.sqrt(2)))) <= 1e-9 for z in zs)))
    r = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        n, p = r.integers(5, 30), r.integers(1, 5)
        X = r.normal(size=(n, p))
        y = r.normal(size=n)
        beta, _ = solve_least_squares(X, y)
        oracle = gauss_solve(X.T @ X, X.T @ y)
        worst = max(worst, float(np.max(np.abs(beta - oracle))))
    checks.append((f"least squares vs elimination (max err {worst:.1e})", worst <= 1e-9))
    acceptance(11, "tail functions vs closed forms, least squares vs elimination", checks)


def test_criterion_12_determinism(acceptance, tmp_path, capsys):
    argv = ["engel1857.csv", "--dep", "foodexp", "--indep", "income",
            "--m1", "sqreg", "--m1-opts", "q(.25) r(50)", "--m2", "sqreg", "--m2-opts", "q(.75) r(50)",
            "--seed", "2024", "-q"]
    blobs, codes = [], []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        codes.append(main(argv + ["--json", str(path)]))
        blobs.append(path.read_bytes())
    capsys.readouterr()
    acceptance(12, "fixed --seed gives byte-identical JSON", [
        ("exit 0", codes == [0, 0]),
        ("identical bytes", blobs[0] == blobs[1]),
        ("valid JSON", bool(json.loads(blobs[0]))),
    ])
