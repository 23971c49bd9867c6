import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sinoma.errors import (
    DegenerateDenominator,
    DeltaOutOfRange,
    InvalidSlopeInputs,
    NonPhysicalNoise,
)
from sinoma.noise_matching import (
    SinomaConfig,
    add_artificial_noise,
    lambda_from_q,
    noiseless_sds,
    q_ep,
    recover_noise,
    run_replicates,
    run_sinoma,
    slope_from_delta,
    slope_from_q,
    whiteness_hazard,
)
from sinoma.regression import fit_evm, fit_inv, fit_ols, fit_rma
from sinoma.series import PairedSeries, Series
from sinoma.synth import (
    NoiseSpec,
    contaminate,
    gen_sine,
    gen_surrogate_climate,
    pseudo_proxy_suite,
)
from sinoma import streams

from conftest import random_valid_pair

TABLE_CONFIGS = {
    "heavy_y_noise": NoiseSpec(0.00005, 2.2),  # ols-favoring conditions
    "matched_noise": NoiseSpec(0.195, 0.860),  # variance-matching conditions
    "heavy_x_noise": NoiseSpec(0.5, 0.00022),  # inverse-favoring conditions
}


def sine_pair(name, seed):
    x, y = gen_sine(128, 2.1)
    return contaminate(x, y, TABLE_CONFIGS[name], seed)


class TestQEP:
    def test_first_pass_pattern(self):
        # Ten fresh realizations per config; the endpoint ratio separates the
        # three noise regimes.
        means = {}
        for name in TABLE_CONFIGS:
            qs = [
                run_sinoma(sine_pair(name, seed), SinomaConfig(seed=seed, max_iterations=1)).q_ep_first
                for seed in range(10)
            ]
            means[name] = float(np.mean(qs))
        assert means["heavy_y_noise"] > 1.5
        assert abs(means["matched_noise"] - 1.0) < 0.15
        assert means["heavy_x_noise"] < 0.8

    def test_whole_series_identity(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            pair = random_valid_pair(rng)
            d = q_ep(pair, whole_series=True)
            assert d.q_ep == pytest.approx(1.0, abs=1e-10)
            assert d.delta_ep == pytest.approx(0.0, abs=1e-10)

    @given(seed=st.integers(0, 2**31))
    @settings(max_examples=40, deadline=None)
    def test_q_delta_sign_consistency(self, seed):
        rng = np.random.default_rng(seed)
        sig = np.cumsum(rng.standard_normal(80))
        sig = sig / np.std(sig)
        x = Series(sig + rng.standard_normal(80))
        y = Series(sig + 0.5 * rng.standard_normal(80))
        pair = PairedSeries(x, y)
        if pair.summary.cov_xy <= 0:
            return
        try:
            d = q_ep(pair)
        except Exception:
            return
        if d.q_ep != 1.0:
            assert math.copysign(1, d.q_ep - 1.0) == math.copysign(1, -d.delta_ep)

    def test_grid_mode_contains_endpoint_values(self):
        pair = sine_pair("matched_noise", 2)
        d = q_ep(pair, mode="grid_max", grid_points=11)
        assert d.slope_grid is not None and len(d.slope_grid) == 11
        assert d.ep_modeled_at_ols >= max(0.0, d.slope_grid[0][3] - 1e-12)
        assert d.ep_observed_at_inv >= d.slope_grid[-1][2] - 1e-12


class TestSlopeFromQ:
    def test_unit_ratio_gives_rma(self):
        assert slope_from_q(1.0, 2.11, 2.97) == 2.11

    def test_zero_ratio_gives_inv(self):
        assert slope_from_q(0.0, 2.11, 2.97) == 2.97

    def test_large_ratio_tends_to_ols(self, fixture_pair):
        co = fit_ols(fixture_pair).slope
        cr = fit_rma(fixture_pair).slope
        ci = fit_inv(fixture_pair).slope
        assert slope_from_q(1e6, cr, ci) == pytest.approx(co, rel=1e-3)

    def test_equals_evm_at_implied_ratio(self, fixture_pair):
        # Independent oracle: the closed form equals the errors-in-variables
        # fit at the implied noise ratio c_rma^2 * q^2.
        cr = fit_rma(fixture_pair).slope
        ci = fit_inv(fixture_pair).slope
        for q in (0.3, 0.8, 1.3, 2.5):
            expect = fit_evm(fixture_pair, lambda_from_q(q, cr)).slope
            assert slope_from_q(q, cr, ci) == pytest.approx(expect, rel=1e-9)

    def test_invalid_inputs(self):
        with pytest.raises(InvalidSlopeInputs):
            slope_from_q(-0.1, 1.0, 2.0)
        with pytest.raises(InvalidSlopeInputs):
            slope_from_q(1.0, 2.0, 1.0)


class TestSlopeFromDelta:
    def test_zero_gives_rma(self):
        assert slope_from_delta(0.0, 1.0, 2.0, 3.0) == 2.0

    def test_near_one_gives_inv(self):
        assert slope_from_delta(0.999, 1.0, 2.0, 3.0) == pytest.approx(2.999)

    def test_negative_branch_corrected_vs_verbatim(self):
        # delta = -0.5 with (c_ols, c_rma) = (1, 2): the corrected branch
        # moves toward the ols slope (1.5); the sign-flipped variant kept for
        # comparison moves away (2.5).
        assert slope_from_delta(-0.5, 1.0, 2.0, 3.0) == pytest.approx(1.5)
        assert slope_from_delta(-0.5, 1.0, 2.0, 3.0, verbatim=True) == pytest.approx(2.5)

    def test_out_of_range(self):
        with pytest.raises(DeltaOutOfRange):
            slope_from_delta(1.0, 1.0, 2.0, 3.0)


class TestLambdaFromQ:
    def test_unit_ratio(self):
        assert lambda_from_q(1.0, 2.1) == pytest.approx(4.41)

    def test_direct_product(self):
        assert lambda_from_q(2.0, 2.1) == pytest.approx(17.64)

    def test_matched_sine_config(self):
        # Variance-matched dataset: the implied noise ratio lands near the
        # squared true slope.
        vals = []
        for seed in range(10):
            pair = sine_pair("matched_noise", seed)
            d = q_ep(pair)
            vals.append(lambda_from_q(d.q_ep, fit_rma(pair).slope))
        assert np.mean(vals) == pytest.approx(4.41, rel=0.3)


class TestArtificialNoise:
    def test_zero_variance_identity(self):
        s = Series([1.0, 2.0, 3.0])
        rng = streams.substream(0, 99)
        out = add_artificial_noise(s, 0.0, rng)
        assert np.array_equal(out.values, s.values)

    def test_large_sample_variance(self):
        s = Series(np.zeros(100_000))
        out = add_artificial_noise(s, 1.0, streams.substream(1, 99))
        assert out.var() == pytest.approx(1.0, rel=0.02)
        assert abs(out.mean()) <= 3.0 * math.sqrt(1.0 / 100_000)

    def test_deterministic_given_stream(self):
        s = Series(np.arange(50, dtype=float))
        a = add_artificial_noise(s, 0.5, streams.substream(7, 4)).values
        b = add_artificial_noise(s, 0.5, streams.substream(7, 4)).values
        assert np.array_equal(a, b)


class TestRecoverNoise:
    def test_degenerate_denominator(self):
        with pytest.raises(DegenerateDenominator):
            recover_noise(1.0, 1.0, 0.1, 0.1)

    def test_forward_inverse_identity(self):
        # Constructed: s2_eps=0.25, s2_del=1.0 (ratio 4); artificial 0.75 on
        # the predictor brings the modified ratio to 1.
        s2_eps, s2_del = recover_noise(4.0, 1.0, 0.75, 0.0)
        assert s2_eps == pytest.approx(0.25, abs=1e-10)
        assert s2_del == pytest.approx(1.0, abs=1e-10)

    def test_negative_output_rejected(self):
        with pytest.raises(NonPhysicalNoise):
            recover_noise(0.5, 2.0, 10.0, 0.0)

    def test_replicated_run_reproduces_published_style_row(self):
        # Row-style check: slope 1.004 => matched ratio 1.004^2, original
        # ratio 0.215, artificial sds (0.028, 1.112) => noise sds near
        # (1.248, 0.579).
        lam_pp = 1.004**2
        s2_eps, s2_del = recover_noise(0.215, lam_pp, 0.028**2, 1.112**2)
        assert math.sqrt(s2_eps) == pytest.approx(1.248, abs=0.05)
        assert math.sqrt(s2_del) == pytest.approx(0.579, abs=0.05)


class TestNoiselessSds:
    def test_zero_noise(self, fixture_pair):
        sd_x, sd_y = noiseless_sds(fixture_pair, 0.0, 0.0)
        assert sd_x == pytest.approx(fixture_pair.x.sd())
        assert sd_y == pytest.approx(fixture_pair.y.sd())

    def test_boundary_excluded(self, fixture_pair):
        with pytest.raises(NonPhysicalNoise):
            noiseless_sds(fixture_pair, fixture_pair.summary.var_x, 0.0)


class TestWhitenessHazard:
    def test_white_pair_flagged(self):
        flagged = 0
        for seed in range(10):
            sig = gen_surrogate_climate(101, 0.0, seed)
            (pair, _), = pseudo_proxy_suite(sig, [1.0], 0.3, seed)
            flagged += whiteness_hazard(pair)
        assert flagged >= 8

    def test_smooth_signal_not_flagged(self):
        for seed in range(5):
            pair = sine_pair("heavy_y_noise", seed)
            assert not whiteness_hazard(pair)


class TestRunSinoma:
    def test_sine_configs_recover_true_slope(self):
        for name in TABLE_CONFIGS:
            slopes = [
                run_sinoma(sine_pair(name, seed), SinomaConfig(seed=seed)).slope
                for seed in range(10)
            ]
            assert np.mean(slopes) == pytest.approx(2.1, abs=0.15), name

    def test_pseudo_proxy_replicates(self):
        sig = gen_surrogate_climate(101, 0.9, seed=15)
        lams = [0.096, 0.118, 0.142, 0.182, 0.715, 1.481, 2.972, 9.790, 10.5, 16.7]
        suite = pseudo_proxy_suite(sig, lams, 0.3, seed=15)
        pair, spec = suite[5]
        summary = run_replicates(pair, SinomaConfig(seed=7, max_iterations=40, replicates=10))
        assert summary.slope_mean == pytest.approx(1.0, abs=0.1)
        assert summary.slope_sd <= 0.1
        assert summary.lambda_evm_mean == pytest.approx(spec.lam, rel=0.5)
        # Known-truth construction: replicate-mean recovered variances stay
        # within 25% of the variances that built the pair.
        assert summary.s2_epsilon_mean == pytest.approx(spec.s2_epsilon, rel=0.25)
        assert summary.s2_delta_mean == pytest.approx(spec.s2_delta, rel=0.25)

    def test_noiseless_collinear_pair(self):
        rng = np.random.default_rng(8)
        x = Series(np.cumsum(rng.standard_normal(101)))
        pair = PairedSeries(x, Series(2.0 * x.values))
        config = SinomaConfig(seed=3)
        res = run_sinoma(pair, config)
        assert res.slope == pytest.approx(2.0, abs=2 * config.slope_tolerance * 2.0)
        # Only warm-up noise was ever present, so the recovered noise
        # variances sit at (or are clamped to) the tiny-noise level.
        tiny = 1e-4 * pair.summary.var_x
        assert res.s2_epsilon <= 10 * tiny
        assert res.s2_delta <= 10 * tiny * 4.0

    def test_bit_identical_given_seed(self):
        pair = sine_pair("matched_noise", 4)
        a = run_sinoma(pair, SinomaConfig(seed=11), replicate_index=2)
        b = run_sinoma(pair, SinomaConfig(seed=11), replicate_index=2)
        assert a == b  # frozen dataclasses compare field-wise, bit for bit

    def test_negative_slope_restored(self):
        pair = sine_pair("matched_noise", 5)
        flipped = PairedSeries(pair.x, Series(-pair.y.values))
        res = run_sinoma(flipped, SinomaConfig(seed=5))
        assert res.sign == -1.0
        assert res.slope == pytest.approx(-2.1, abs=0.35)

    def test_steep_slope_rescaled_run(self):
        # Scale-free oracle: the same geometry at slope 1 should show the
        # same relative accuracy as the steep run after rescaling.
        steep_rel, flat_rel = [], []
        for seed in range(5):
            x, y = gen_sine(128, 8.0)
            pair = contaminate(x, y, NoiseSpec(0.195, 0.860 * (8.0 / 2.1) ** 2), seed)
            res = run_sinoma(pair, SinomaConfig(seed=seed))
            assert res.scale > 1.0
            steep_rel.append(res.slope / 8.0)

            xf, yf = gen_sine(128, 1.0)
            flat = contaminate(xf, yf, NoiseSpec(0.195 / (2.1 ** 2), 0.860 / (2.1 ** 2)), seed)
            flat_rel.append(run_sinoma(flat, SinomaConfig(seed=seed)).slope)
        assert np.mean(steep_rel) == pytest.approx(np.mean(flat_rel), abs=0.15)
        assert np.mean(steep_rel) == pytest.approx(1.0, abs=0.15)

    def test_monotone_bracketing(self):
        pair = sine_pair("heavy_y_noise", 1)
        res = run_sinoma(pair, SinomaConfig(seed=1))
        trace = res.trace
        # Strong noise went to the predictor here; its artificial variance
        # sequence must be monotone between sign changes of (q - 1).
        arts = [t.s2_epsilon_artificial for t in trace[1:]]
        sides = [math.copysign(1, t.q_ep - 1.0) for t in trace[1:]]
        runs = []
        start = 0
        for i in range(1, len(sides)):
            if sides[i] != sides[i - 1]:
                runs.append(arts[start : i + 1])
                start = i
        for run in runs:
            diffs = np.diff(run[:-1])
            assert np.all(diffs >= -1e-15) or np.all(diffs <= 1e-15)

    def test_lambda_self_consistency(self):
        pair = sine_pair("matched_noise", 7)
        res = run_sinoma(pair, SinomaConfig(seed=7))
        if not any("bracket" in w for w in res.warnings):
            assert fit_evm(pair, res.lambda_evm).slope == pytest.approx(res.slope, rel=1e-6)
        if res.s2_epsilon > 0 and res.s2_delta > 0 and math.isfinite(res.lambda_evm):
            assert res.s2_delta / res.s2_epsilon == pytest.approx(res.lambda_evm, rel=1e-9)
        if not math.isnan(res.s2_epsilon):
            assert res.sd_x_noiseless**2 + res.s2_epsilon == pytest.approx(
                pair.summary.var_x, rel=1e-9
            )

    def test_known_lambda_superiority(self):
        # For noise ratios far from a model's assumption, the matched
        # estimate beats that model on the replicate mean.
        sig = gen_surrogate_climate(101, 0.9, seed=20)
        for lam, rivals in ((0.1, ("ols", "rma")), (1.0, ("ols", "inv")), (10.0, ("inv", "rma"))):
            suite = pseudo_proxy_suite(sig, [lam], 0.3, seed=20)
            pair, spec = suite[0]
            summary = run_replicates(pair, SinomaConfig(seed=2, max_iterations=40, replicates=10))
            err = abs(summary.slope_mean - 1.0)
            fits = {"ols": fit_ols, "rma": fit_rma, "inv": fit_inv}
            for rival in rivals:
                assert err <= abs(fits[rival](pair).slope - 1.0) + 1e-9, (lam, rival)

    def test_ratio_constancy_across_slopes(self):
        # Idealized check: the mean per-interval bandwidth ratio times the
        # model slope is roughly constant across the slope bracket.
        from sinoma.fluctuations import ep_records, joint_partition, segment

        pair = sine_pair("matched_noise", 9)
        co, ci = fit_ols(pair).slope, fit_inv(pair).slope
        p_obs = segment(pair.y)
        means = []
        for c in np.linspace(co, ci, 5):
            pred = Series(c * pair.x.values + (pair.summary.mean_y - c * pair.summary.mean_x))
            recs = ep_records(joint_partition(p_obs, segment(pred)))
            ratios = [
                (r.ep_modeled / r.ep_observed) * c
                for r in recs
                if r.ep_observed > 0 and r.ep_modeled > 0
            ]
            means.append(float(np.mean(ratios)))
        assert np.std(means) / np.mean(means) < 0.2


class TestReplicateAggregation:
    def test_thread_count_does_not_change_results(self):
        pair = sine_pair("matched_noise", 3)
        config = SinomaConfig(seed=9, replicates=4, max_iterations=15)
        serial = run_replicates(pair, config, threads=1)
        threaded = run_replicates(pair, config, threads=4)
        assert serial.results == threaded.results
        assert serial.slope_mean == threaded.slope_mean

    def test_replicate_streams_disjoint(self):
        pair = sine_pair("matched_noise", 3)
        config = SinomaConfig(seed=9, replicates=3, max_iterations=10)
        summary = run_replicates(pair, config)
        traces = [r.trace for r in summary.results]
        assert traces[0] != traces[1] and traces[1] != traces[2]
