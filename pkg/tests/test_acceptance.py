"""
Acceptance suite. Each test carries ``@pytest.mark.criterion(n)``; the
terminal summary prints one PASS/FAIL line per criterion.
"""

import io

import numpy as np
import pytest

import oracles
from greenstat import cli
from greenstat.descriptive import se_mean, se_skewness, summarize
from greenstat.inference import GroupedSeries, anova_oneway, levene, pearson, LEVENE_VARIANTS
from greenstat.regression import (
    adjusted_r2,
    f_change,
    get_published_model,
    ols,
    predict,
    residual_statistics,
    stepwise_forward,
)
from greenstat.specfun import f_upper_p, reg_inc_beta, t_two_tailed_p

WEATHER = ["irradiance_wm2", "temperature_c", "relative_humidity_pct", "dust_mgm3", "wind_speed_kmh"]


@pytest.mark.criterion(1)
class TestPredictionFixtures:
    def test_pv_model(self):
        pv = get_published_model("pv_model_4")
        inputs = {"irradiance_wm2": 500, "temperature_c": 30,
                  "relative_humidity_pct": 40, "wind_speed_kmh": 10}
        assert predict(pv, inputs) == pytest.approx(10.378, abs=1e-9)

    def test_load_model(self):
        load = get_published_model("load_model_2")
        assert predict(load, {"temperature_c": 30, "relative_humidity_pct": 40}) == \
            pytest.approx(8.334, abs=1e-9)

    def test_zero_inputs_give_intercepts_exactly(self):
        for name, expected in (("pv_model_4", 7.468), ("load_model_2", 15.614)):
            model = get_published_model(name)
            assert predict(model, dict.fromkeys(model.predictors, 0.0)) == expected


@pytest.mark.criterion(2)
class TestCrossTableIdentities:
    def test_adjusted_r2_single_predictor(self):
        assert adjusted_r2(0.711, 6830, 1) == pytest.approx(0.711, abs=5e-4)

    def test_f_change_matches_printed_and_t_squared(self):
        f = f_change(0.016, 0.727, 6827)
        assert f == pytest.approx(394.375, rel=0.02)
        assert f == pytest.approx(19.859 ** 2, rel=0.02)

    def test_pv_min_std_residual_is_min_residual_over_see(self):
        assert -26.778973 / 3.886880 == pytest.approx(-6.890, abs=1e-3)

    def test_r_is_sd_predicted_over_sd_response(self):
        assert 6.399605 / 7.486917 == pytest.approx(0.855, abs=1e-3)

    def test_load_min_std_residual_is_min_residual_over_see(self):
        assert -11.381020 / 7.246513 == pytest.approx(-1.571, abs=1e-3)

    def test_identities_hold_on_a_fit(self, rng):
        # the same identities, checked on output produced by the package
        X = rng.normal(size=(300, 2))
        y = 1.0 + X @ [0.5, -0.3] + rng.normal(size=300)
        fit = ols(X, y, ["a", "b"])
        rs = residual_statistics(fit)
        assert rs.predicted[3] / np.std(y, ddof=1) == pytest.approx(fit.r, rel=1e-12)
        assert rs.std_residual[0] == pytest.approx(rs.residual[0] / fit.see, rel=1e-12)
        np.testing.assert_allclose(fit.t_stats, fit.b / fit.se_b, rtol=1e-12)

    def test_se_skewness(self):
        assert se_skewness(6830) == pytest.approx(0.030, abs=5e-4)

    def test_se_mean_irradiance(self):
        assert se_mean(376.76118, 6830) == pytest.approx(4.55886, abs=5e-4)


@pytest.mark.criterion(3)
class TestPrintedDiscrepancies:
    def test_model_one_f_change(self):
        f = f_change(0.711, 0.711, 6828)
        assert f == pytest.approx(129.621 ** 2, rel=0.01)
        assert f != pytest.approx(18801.538, rel=0.05)

    def test_temperature_se_mean(self):
        computed = se_mean(8.59091, 6830)
        assert computed == pytest.approx(0.10395, abs=5e-6)
        assert computed != pytest.approx(1.0395, rel=0.05)


def _random_array(rng, n):
    kind = rng.integers(4)
    if kind == 0:
        return rng.normal(rng.uniform(-50, 50), rng.uniform(0.1, 20), n)
    if kind == 1:
        return rng.gamma(rng.uniform(0.5, 5), rng.uniform(0.5, 3), n)
    if kind == 2:
        return rng.integers(0, 12, n).astype(float)  # ties, exercises mode
    return rng.uniform(-1, 1, n) * 10 ** rng.uniform(-3, 3)


def _split(rng, x):
    k = int(rng.integers(2, 6))
    cuts = np.sort(rng.choice(np.arange(2, x.size - 1), size=k - 1, replace=False))
    return [g for g in np.split(x, cuts)]


@pytest.mark.criterion(4)
def test_oracle_equivalence_1000_arrays():
    rng = np.random.default_rng(4)
    close = dict(rel=1e-10, abs=1e-12)
    for _ in range(1000):
        n = int(rng.integers(12, 201))
        x = _random_array(rng, n)
        xs = x.tolist()
        s = summarize(x)
        assert s.mean == pytest.approx(oracles.mean(xs), **close)
        assert s.variance == pytest.approx(oracles.variance(xs), **close)
        assert s.sd == pytest.approx(oracles.sd(xs), **close)
        assert s.median == pytest.approx(oracles.median(xs), **close)
        assert s.mode == oracles.mode(xs)
        assert s.trimmed_mean == pytest.approx(oracles.trimmed_mean(xs), **close)
        assert s.skewness == pytest.approx(oracles.skewness_g1(xs), rel=1e-10,
                                           abs=1e-12 * abs(oracles.skewness_g1(xs)) + 1e-13)
        assert s.range == max(xs) - min(xs)

        y = 0.3 * x + rng.normal(0, np.std(x) + 1e-3, n)
        assert pearson(x, y).r == pytest.approx(oracles.pearson_r(xs, y.tolist()), **close)

        cont = x + rng.normal(0, 1e-3, n)  # no exact ties inside the Levene/ANOVA groups
        groups = _split(rng, cont)
        lists = [g.tolist() for g in groups]
        g = GroupedSeries.from_lists(*groups)
        assert anova_oneway(g).F == pytest.approx(oracles.anova_f(lists), **close)
        for variant in LEVENE_VARIANTS:
            res = levene(g, variant)
            assert res.W == pytest.approx(oracles.levene_w(lists, variant), **close)
        adj = levene(g, "median_adjusted_df")
        assert adj.df2 == pytest.approx(oracles.levene_adjusted_df2(lists), **close)


@pytest.mark.criterion(5)
class TestRegressionRecovery:
    def test_noiseless_recovery(self, rng):
        X = rng.normal(size=(200, 4)) * [1.0, 10.0, 100.0, 0.01]
        beta = np.array([3.0, -1.5, 0.25, 0.002, 40.0])
        y = beta[0] + X @ beta[1:]
        fit = ols(X, y, list("abcd"))
        np.testing.assert_allclose(fit.b, beta, rtol=0, atol=1e-8)

    def test_noisy_coverage_over_500_trials(self):
        rng = np.random.default_rng(5)
        beta = np.array([2.0, 0.7, -1.2, 0.05])
        inside = total = 0
        for _ in range(500):
            X = rng.normal(size=(80, 3)) * [1.0, 3.0, 20.0]
            y = beta[0] + X @ beta[1:] + rng.normal(0, 1.5, 80)
            fit = ols(X, y, ["a", "b", "c"])
            inside += int(np.sum(np.abs(fit.b - beta) <= 3 * fit.se_b))
            total += beta.size
        assert inside / total >= 0.99

    def test_residuals_orthogonal_to_predictors(self, rng):
        X = rng.normal(size=(500, 3)) * [1.0, 1e3, 1e-3]
        y = 1 + X @ [1.0, 2e-3, 300.0] + rng.normal(size=500)
        fit = ols(X, y, ["a", "b", "c"])
        design = np.column_stack([np.ones(500), X])
        scaled = design.T @ fit.residuals / (np.linalg.norm(design, axis=0) * np.linalg.norm(fit.residuals))
        assert np.max(np.abs(scaled)) <= 1e-8


@pytest.mark.criterion(6)
class TestStepwiseReproduction:
    def test_pv_enters_irradiance_first_and_recovers_coefficients(self, synthetic):
        trace = stepwise_forward(synthetic, "pv_kw", WEATHER)
        assert trace.entered[0] == "irradiance_wm2"
        truth = get_published_model("pv_model_4")
        assert set(trace.entered) == set(truth.predictors)
        fit = trace.final
        assert fit.r2 == pytest.approx(0.73, abs=0.02)
        for name, coef in truth.coefficients.items():
            i = fit.terms.index(name)
            assert abs(fit.b[i] - coef) <= 3 * fit.se_b[i], name

    def test_load_enters_temperature_and_humidity_only(self, synthetic):
        trace = stepwise_forward(synthetic, "load_kw", WEATHER)
        assert set(trace.entered) == {"temperature_c", "relative_humidity_pct"}


GRID = np.linspace(0.01, 40.0, 200)


@pytest.mark.criterion(7)
class TestTailProbabilities:
    @pytest.mark.parametrize("df, closed", [(1, oracles.t_p_df1), (2, oracles.t_p_df2)])
    def test_t_closed_forms(self, df, closed):
        for t in GRID:
            for sign in (1, -1):
                assert t_two_tailed_p(sign * t, df).value == pytest.approx(closed(t), rel=0, abs=1e-10)

    @pytest.mark.parametrize("df1, df2, closed", [
        (1, 1, oracles.f_p_1_1),
        (1, 2, oracles.f_p_1_2),
        (2, 1, lambda f: oracles.f_p_2_nu(f, 1)),
        (2, 2, lambda f: oracles.f_p_2_nu(f, 2)),
    ])
    def test_f_closed_forms(self, df1, df2, closed):
        for f in GRID:
            assert f_upper_p(f, df1, df2).value == pytest.approx(closed(f), rel=0, abs=1e-10)

    def test_beta_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            a, b = rng.uniform(0.1, 60.0, 2)
            x = 1.0 - (1.0 - rng.uniform(0.0, 1.0))
            assert reg_inc_beta(a, b, x) + reg_inc_beta(b, a, 1.0 - x) == pytest.approx(1.0, abs=1e-12)


def _run(argv):
    out = io.StringIO()
    return cli.main(argv, out), out.getvalue()


@pytest.mark.criterion(8)
class TestDeterminismAndExitCodes:
    def test_report_is_byte_identical(self):
        code1, first = _run(["report"])
        code2, second = _run(["report"])
        assert code1 == code2 == cli.EXIT_OK
        assert first.encode() == second.encode()

    def test_report_json_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert _run(["report", "--format", "json", "--output-dir", str(a)])[0] == 0
        assert _run(["report", "--format", "json", "--output-dir", str(b)])[0] == 0
        files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        assert files
        for rel in files:
            assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel

    def test_exit_2_for_missing_file(self, tmp_path):
        assert _run(["describe", "--input", str(tmp_path / "absent.csv")])[0] == cli.EXIT_IO

    def test_exit_2_for_malformed_csv(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("timestamp,temperature_c\n2020-01-01T00:00:00,1\n")
        assert _run(["describe", "--input", str(bad)])[0] == cli.EXIT_IO

    def test_exit_3_when_cleaning_empties_the_data(self, tmp_path):
        path = tmp_path / "all_bad.csv"
        header = "timestamp," + ",".join(cli.ALL_VARIABLES)
        path.write_text(header + "\n2020-01-01T00:00:00,-99,50,100,0.5,5,1,1\n")
        assert _run(["describe", "--input", str(path)])[0] == cli.EXIT_EMPTY
        assert _run(["clean", "--input", str(path), "-o", str(tmp_path / "c.csv")])[0] == cli.EXIT_EMPTY

    def test_exit_4_for_analysis_errors(self):
        assert _run(["describe", "--variables", "no_such_variable"])[0] == cli.EXIT_ANALYSIS
        assert _run(["predict", "pv_model_4", "--irradiance", "500"])[0] == cli.EXIT_ANALYSIS
