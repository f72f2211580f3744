"""Subspace, linear-prediction, and periodogram frequency estimators."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from freqpredict.errors import (
    NumericalDegeneracyError,
    ParameterError,
    UnderResolutionError,
)
from freqpredict.hrse import (
    ESTIMATORS,
    FrequencyEstimate,
    HankelConfig,
    default_hankel_rows,
    esprit_estimate,
    periodogram_estimate,
    prony_estimate,
)
from freqpredict.metrics import nmse, nmse_db
from freqpredict.signal_core import (
    NoiseSpec,
    SampleWindow,
    SignalModel,
    SinusoidSpec,
    add_noise,
    split,
    synthesize,
)

TWO_TONE = SinusoidSpec(amplitudes=(1.0, 1.0), frequencies=(0.12, 0.27))


def noiseless(spec, n):
    return synthesize(spec, n)


class TestDefaultHankelRows:
    def test_plain_case(self):
        # 150 samples, two real tones: floor(150/2) = 75 needs no clamping.
        assert default_hankel_rows(150, 4) == 75

    def test_clamped_low(self):
        # floor(9/2) = 4 < order+1 = 5, so the lower clamp engages.
        assert default_hankel_rows(9, 4) == 5

    def test_clamped_high(self):
        assert default_hankel_rows(10, 4) == 5

    def test_too_short(self):
        with pytest.raises(ParameterError):
            default_hankel_rows(8, 4)


class TestHankelConfig:
    def test_rows_below_order(self):
        with pytest.raises(ParameterError):
            HankelConfig(rows=3, model_order=4)

    def test_non_positive(self):
        with pytest.raises(ParameterError):
            HankelConfig(rows=0, model_order=0)


class TestFrequencyEstimate:
    def test_must_be_sorted(self):
        with pytest.raises(ParameterError):
            FrequencyEstimate((0.3, 0.1), "x")

    def test_range_enforced(self):
        with pytest.raises(ParameterError):
            FrequencyEstimate((0.0,), "x")
        with pytest.raises(ParameterError):
            FrequencyEstimate((0.6,), "x")


class TestNoiselessExactness:
    SPECS = [
        SinusoidSpec((1.0,), (0.07,)),
        SinusoidSpec((1.0, 0.5), (0.12, 0.27)),
        SinusoidSpec((2.0, 1.0, 0.5), (0.08, 0.21, 0.43)),
        SinusoidSpec((1.0, 1.0, 1.0, 1.0), (0.05, 0.15, 0.3, 0.45)),
    ]

    @pytest.mark.parametrize("spec", SPECS)
    @pytest.mark.parametrize("estimator", [esprit_estimate, prony_estimate])
    def test_exact_recovery(self, spec, estimator):
        window = noiseless(spec, 8 * spec.count + 10)
        est = estimator(window, spec.count)
        np.testing.assert_allclose(est.frequencies, spec.frequencies, atol=1e-9)

    @pytest.mark.parametrize("estimator", [esprit_estimate, prony_estimate])
    def test_pairs_exact_noiseless(self, estimator):
        # Conjugate root pairs from clean real data agree far below the
        # default tolerance; a near-zero pair_tol must still pass.
        window = noiseless(TWO_TONE, 60)
        est = estimator(window, 2, pair_tol=1e-9)
        np.testing.assert_allclose(est.frequencies, TWO_TONE.frequencies, atol=1e-9)

    @pytest.mark.parametrize("estimator", [esprit_estimate, prony_estimate])
    def test_complex_model(self, estimator):
        spec = SinusoidSpec((1.0, 0.5), (0.12, 0.47))
        window = synthesize(spec, 40, model=SignalModel.COMPLEX_EXP)
        est = estimator(window, 2)
        np.testing.assert_allclose(est.frequencies, spec.frequencies, atol=1e-9)

    def test_boundary_frequency_complex(self):
        # f = 0.5 is invisible to the real model but perfectly visible to
        # the complex one.
        spec = SinusoidSpec((1.0, 1.0), (0.2, 0.5))
        window = synthesize(spec, 40, model=SignalModel.COMPLEX_EXP)
        est = esprit_estimate(window, 2)
        np.testing.assert_allclose(est.frequencies, (0.2, 0.5), atol=1e-9)

    def test_method_tags(self):
        window = noiseless(TWO_TONE, 60)
        assert esprit_estimate(window, 2).method_tag == "esprit"
        assert prony_estimate(window, 2).method_tag == "prony"
        assert periodogram_estimate(window, 2).method_tag == "periodogram"


class TestValidation:
    def test_prony_short_window(self):
        with pytest.raises(ParameterError):
            prony_estimate(noiseless(TWO_TONE, 7), 2)

    def test_esprit_short_window(self):
        with pytest.raises(ParameterError):
            esprit_estimate(noiseless(TWO_TONE, 8), 2)

    def test_bad_component_count(self):
        with pytest.raises(ParameterError):
            esprit_estimate(noiseless(TWO_TONE, 60), 0)

    def test_cfg_order_mismatch(self):
        window = noiseless(TWO_TONE, 60)
        with pytest.raises(ParameterError):
            esprit_estimate(window, 2, cfg=HankelConfig(rows=20, model_order=6))

    def test_cfg_insufficient_columns(self):
        window = noiseless(TWO_TONE, 60)
        with pytest.raises(ParameterError):
            esprit_estimate(window, 2, cfg=HankelConfig(rows=58, model_order=4))

    def test_explicit_cfg_works(self):
        window = noiseless(TWO_TONE, 60)
        est = esprit_estimate(window, 2, cfg=HankelConfig(rows=20, model_order=4))
        np.testing.assert_allclose(est.frequencies, TWO_TONE.frequencies, atol=1e-9)

    def test_periodogram_grid_too_small(self):
        with pytest.raises(ParameterError):
            periodogram_estimate(noiseless(TWO_TONE, 150), 2, grid_size=100)

    def test_periodogram_bad_floor(self):
        with pytest.raises(ParameterError):
            periodogram_estimate(noiseless(TWO_TONE, 150), 2, min_rel_power=0.0)


class TestDegenerateInputs:
    def test_real_positive_roots_underresolved(self):
        # Two decaying real exponentials sit at zero angle; there is no
        # positive frequency to report and both estimators must say so.
        n = np.arange(1, 41)
        x = SampleWindow(0.9**n + 0.7**n)
        with pytest.raises(UnderResolutionError):
            prony_estimate(x, 1)
        with pytest.raises(UnderResolutionError):
            esprit_estimate(x, 1)

    def test_prony_rank_collapse(self):
        # One real tone spans rank 2, so an order-4 prediction system is
        # rank deficient and the requested order cannot be identified.
        window = noiseless(SinusoidSpec((1.0,), (0.2,)), 60)
        with pytest.raises(NumericalDegeneracyError):
            prony_estimate(window, 2)

    def test_heavy_noise_contract(self):
        # At strongly negative SNR every outcome must be either a valid
        # sorted in-range estimate or one of the documented failures.
        clean = noiseless(TWO_TONE, 40)
        for seed in range(20):
            noisy, _ = add_noise(clean, NoiseSpec(snr_db=-5.0, seed=seed))
            for estimator in (esprit_estimate, prony_estimate):
                try:
                    est = estimator(noisy, 2)
                except (NumericalDegeneracyError, UnderResolutionError):
                    continue
                assert len(est.frequencies) == 2
                assert all(0.0 < f <= 0.5 for f in est.frequencies)


class TestModerateNoise:
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_estimates_sorted_in_range(self, seed):
        clean = noiseless(TWO_TONE, 150)
        noisy, _ = add_noise(clean, NoiseSpec(snr_db=10.0, seed=seed))
        est = esprit_estimate(noisy, 2)
        assert list(est.frequencies) == sorted(est.frequencies)
        assert all(0.0 < f <= 0.5 for f in est.frequencies)

    def test_accuracy_at_20db(self):
        # The LS prediction route carries a noise bias the subspace route
        # does not, hence the looser tolerance for it.
        clean = noiseless(TWO_TONE, 150)
        noisy, _ = add_noise(clean, NoiseSpec(snr_db=20.0, seed=3))
        est = esprit_estimate(noisy, 2)
        np.testing.assert_allclose(est.frequencies, TWO_TONE.frequencies, atol=5e-4)
        est = prony_estimate(noisy, 2)
        np.testing.assert_allclose(est.frequencies, TWO_TONE.frequencies, atol=1e-2)


class TestPeriodogram:
    def test_single_tone_on_grid(self):
        # 0.25 lands exactly on the padded grid, so refinement is a no-op.
        window = noiseless(SinusoidSpec((1.0,), (0.25,)), 150)
        est = periodogram_estimate(window, 1)
        np.testing.assert_allclose(est.frequencies, (0.25,), atol=1e-12)

    def test_single_tone_off_grid(self):
        window = noiseless(SinusoidSpec((1.0,), (0.123,)), 150)
        est = periodogram_estimate(window, 1)
        np.testing.assert_allclose(est.frequencies, (0.123,), atol=5e-4)

    def test_resolved_separation(self):
        # Two tones 2/N apart sit in distinct mainlobes of the length-N
        # window and must both be found near their true locations.
        spec = SinusoidSpec((1.0, 1.0), (0.2, 0.2 + 2.0 / 150))
        window = noiseless(spec, 150)
        est = periodogram_estimate(window, 2)
        np.testing.assert_allclose(est.frequencies, spec.frequencies, atol=5e-3)

    def test_merged_separation(self):
        # 0.3/N is far inside one mainlobe width; only a single peak
        # survives and asking for two must fail loudly.
        spec = SinusoidSpec((1.0, 1.0), (0.2, 0.2 + 0.3 / 150))
        window = noiseless(spec, 150)
        with pytest.raises(UnderResolutionError):
            periodogram_estimate(window, 2)

    def test_sidelobes_not_counted(self):
        # A single rectangular-window tone has -13 dB sidelobes; the
        # relative power floor must reject them even when l = 2.
        window = noiseless(SinusoidSpec((1.0,), (0.2371,)), 150)
        with pytest.raises(UnderResolutionError):
            periodogram_estimate(window, 2)

    def test_boundary_peak_complex(self):
        spec = SinusoidSpec((1.0,), (0.5,))
        window = synthesize(spec, 64, model=SignalModel.COMPLEX_EXP)
        est = periodogram_estimate(window, 1)
        np.testing.assert_allclose(est.frequencies, (0.5,), atol=1e-12)

    def test_refinement_beats_native_resolution(self):
        # Zero padding plus parabolic refinement should localize a lone
        # tone to a small fraction of the window's 1/N native resolution,
        # at coarse and fine grid sizes alike.
        window = noiseless(SinusoidSpec((1.0,), (0.1234,)), 150)
        for grid_size in (256, 4096, 16384):
            est = periodogram_estimate(window, 1, grid_size=grid_size)
            assert abs(est.frequencies[0] - 0.1234) < (1.0 / 150) / 10


class TestWindowLengthGap:
    def test_long_window_beats_short(self):
        # Close tones (one DFT bin of the long window apart) at 20 dB:
        # the 150-sample window should beat the 50-sample window by well
        # over 10 dB of mean NMSE once failures are set aside.
        delta = 1.0 / 150
        spec = SinusoidSpec((1.0, 1.0), (0.2, 0.2 + delta))
        clean = synthesize(spec, 150)
        short_vals, long_vals = [], []
        for seed in range(25):
            noisy, _ = add_noise(clean, NoiseSpec(snr_db=20.0, seed=seed))
            head, _ = split(noisy, 50)
            try:
                est = esprit_estimate(head, 2)
                short_vals.append(nmse(spec.frequencies, est.frequencies))
            except (NumericalDegeneracyError, UnderResolutionError):
                pass
            est = esprit_estimate(noisy, 2)
            long_vals.append(nmse(spec.frequencies, est.frequencies))
        assert len(long_vals) == 25
        assert short_vals  # some short-window trials succeed
        assert nmse_db(long_vals) <= nmse_db(short_vals) - 10.0


class TestEstimatorRegistry:
    def test_names(self):
        assert set(ESTIMATORS) == {"esprit", "prony", "periodogram"}

    def test_callables_agree(self):
        window = noiseless(TWO_TONE, 150)
        for fn in ESTIMATORS.values():
            est = fn(window, 2)
            np.testing.assert_allclose(
                est.frequencies, TWO_TONE.frequencies, atol=5e-3
            )
