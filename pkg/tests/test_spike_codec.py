import dataclasses
import math

import numpy as np
import pytest
import scipy.stats as st
from hypothesis import given, settings
from hypothesis import strategies as st_h

from word2spike.corpus_io import EmbeddingSet
from word2spike.quantizer import quantize_all
from word2spike.spike_codec import (
    PRESETS,
    CodecConfig,
    ConfigError,
    RateVector,
    SpikeRaster,
    decode,
    estimate_rates,
    generate_raster,
    load_codec_config,
    misclassification_probabilities,
    poisson_cdf,
    poisson_pmf,
    poisson_sf_ge,
    rate_spread,
    rates_from_ternary,
    read_raster_jsonl,
    roundtrip,
    save_codec_config,
    suggest_threshold,
    write_counts_csv,
    write_raster_jsonl,
)

ALT = PRESETS["paper-400ms"]


def raster_from_counts(counts, window_s=0.2):
    trains = tuple(
        (np.arange(c, dtype=float) + 0.5) * (window_s / c) if c else np.empty(0)
        for c in counts
    )
    return SpikeRaster(window_s, trains)


class TestCodecConfig:
    def test_defaults(self):
        cfg = CodecConfig()
        assert (cfg.window_s, cfg.rate_plus_hz, cfg.rate_minus_hz, cfg.threshold_hz) == (
            0.2, 100.0, 50.0, 72.0,
        )
        assert cfg.count_threshold == 15

    def test_threshold_must_separate_rates(self):
        with pytest.raises(ConfigError):
            CodecConfig(threshold_hz=110.0)
        with pytest.raises(ConfigError):
            CodecConfig(rate_minus_hz=100.0)  # equal rates cannot be separated
        with pytest.raises(ConfigError):
            CodecConfig(window_s=0.0)
        with pytest.raises(ConfigError):
            CodecConfig(mode="quantum")

    def test_alt_preset(self):
        assert ALT.window_s == 0.4
        assert (ALT.rate_plus_hz, ALT.rate_minus_hz) == (200.0, 25.0)

    def test_integer_boundary_threshold(self):
        # 75 Hz * 0.2 s = 15 exactly; the ceil must not round up past it
        cfg = CodecConfig(threshold_hz=75.0)
        assert cfg.count_threshold == 15

    def test_config_file_roundtrip(self, tmp_path):
        cfg = CodecConfig(window_s=0.4, rate_plus_hz=200, rate_minus_hz=25,
                          threshold_hz=85, mode="lossless", seed=99)
        path = str(tmp_path / "codec.cfg")
        save_codec_config(cfg, path)
        assert load_codec_config(path) == cfg

    def test_config_file_unknown_key(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("volume = 11\n")
        with pytest.raises(ConfigError):
            load_codec_config(str(path))


class TestRatesFromTernary:
    def test_default_mapping(self):
        rates = rates_from_ternary(np.array([1, 0, -1]), CodecConfig())
        assert rates.rates_hz.tolist() == [100.0, 0.0, 50.0]

    def test_all_zero(self):
        rates = rates_from_ternary(np.zeros(5, dtype=np.int8), CodecConfig())
        assert not rates.rates_hz.any()

    def test_alt_preset_mapping(self):
        rates = rates_from_ternary(np.array([1, -1]), ALT)
        assert rates.rates_hz.tolist() == [200.0, 25.0]


class TestGenerateRaster:
    def test_zero_rate_empty_both_modes(self):
        rates = RateVector(np.array([0.0]))
        for mode in ("stochastic", "lossless"):
            cfg = dataclasses.replace(CodecConfig(), mode=mode)
            assert len(generate_raster(rates, cfg, 0).trains[0]) == 0

    def test_lossless_exact_counts(self):
        cfg = CodecConfig(mode="lossless")
        raster = generate_raster(RateVector(np.array([100.0, 50.0, 0.0])), cfg, 0)
        assert raster.counts().tolist() == [20, 10, 0]
        raster.validate()

    def test_lossless_spikes_evenly_spaced(self):
        cfg = CodecConfig(mode="lossless")
        train = generate_raster(RateVector(np.array([100.0])), cfg, 0).trains[0]
        gaps = np.diff(train)
        assert np.allclose(gaps, gaps[0])
        assert 0 <= train[0] and train[-1] < cfg.window_s

    def test_stochastic_valid_and_deterministic(self):
        cfg = CodecConfig(seed=123)
        rates = RateVector(np.array([100.0, 50.0, 0.0]))
        a = generate_raster(rates, cfg, stream_id=7)
        b = generate_raster(rates, cfg, stream_id=7)
        a.validate()
        for ta, tb in zip(a.trains, b.trains):
            assert np.array_equal(ta, tb)

    def test_stochastic_streams_differ(self):
        cfg = CodecConfig(seed=123)
        rates = RateVector(np.array([100.0]))
        a = generate_raster(rates, cfg, stream_id=0).trains[0]
        b = generate_raster(rates, cfg, stream_id=1).trains[0]
        c = generate_raster(rates, dataclasses.replace(cfg, seed=124), stream_id=0).trains[0]
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_stochastic_mean_and_variance(self):
        # moderate-size check here; the full calibration lives in acceptance
        cfg = CodecConfig(seed=5)
        counts = [
            len(generate_raster(RateVector(np.array([100.0])), cfg, i).trains[0])
            for i in range(4000)
        ]
        lam = 20.0
        assert np.mean(counts) == pytest.approx(lam, abs=4 * math.sqrt(lam / 4000))
        assert np.var(counts) == pytest.approx(lam, rel=0.15)


class TestEstimateAndDecode:
    def test_estimate_rates(self):
        raster = raster_from_counts([14, 0, 21])
        assert estimate_rates(raster).rates_hz.tolist() == [70.0, 0.0, 105.0]

    def test_decode_nominal(self):
        assert decode(raster_from_counts([20, 0, 10]), CodecConfig()).values.tolist() == [1, 0, -1]

    def test_decode_boundary_counts(self):
        cfg = CodecConfig()
        assert decode(raster_from_counts([14]), cfg).values.tolist() == [-1]
        assert decode(raster_from_counts([15]), cfg).values.tolist() == [1]

    def test_decode_no_upper_cap(self):
        assert decode(raster_from_counts([25]), CodecConfig()).values.tolist() == [1]

    def test_decode_gamma_unset(self):
        assert math.isnan(decode(raster_from_counts([20]), CodecConfig()).gamma)

    def test_decode_window_mismatch(self):
        with pytest.raises(ConfigError):
            decode(raster_from_counts([20], window_s=0.4), CodecConfig())

    def test_decode_depends_only_on_counts(self):
        cfg = CodecConfig(seed=1)
        stochastic = generate_raster(RateVector(np.array([100.0, 50.0, 0.0])), cfg, 0)
        rebuilt = raster_from_counts(stochastic.counts())
        assert np.array_equal(decode(stochastic, cfg).values, decode(rebuilt, cfg).values)


class TestRoundtrip:
    def test_lossless_identity(self, random_set):
        result = roundtrip(random_set, CodecConfig(mode="lossless"))
        assert result.matches.all()
        assert np.array_equal(result.decoded.values, result.ternary.values)

    def test_zero_vectors_trivially_match(self):
        es = EmbeddingSet(("a", "b"), np.zeros((2, 8)))
        for mode in ("stochastic", "lossless"):
            result = roundtrip(es, CodecConfig(mode=mode, seed=3))
            assert result.matches.all()

    @settings(max_examples=30, deadline=None)
    @given(st_h.lists(st_h.sampled_from([-1, 0, 1]), min_size=1, max_size=20))
    def test_lossless_identity_all_ternary(self, code):
        # encode an arbitrary ternary word directly, bypassing quantization
        cfg = CodecConfig(mode="lossless")
        rates = rates_from_ternary(np.array(code, dtype=np.int8), cfg)
        decoded = decode(generate_raster(rates, cfg, 0), cfg)
        assert decoded.values.tolist() == code


class TestExactPoisson:
    # scipy is the independent oracle for the hand-rolled summations
    @pytest.mark.parametrize("lam", [0.5, 5.0, 10.0, 20.0, 80.0])
    @pytest.mark.parametrize("k", [0, 1, 5, 15, 34, 100])
    def test_against_scipy(self, k, lam):
        assert poisson_pmf(k, lam) == pytest.approx(st.poisson.pmf(k, lam), rel=1e-12, abs=1e-300)
        assert poisson_cdf(k, lam) == pytest.approx(st.poisson.cdf(k, lam), rel=1e-12)
        assert poisson_sf_ge(k, lam) == pytest.approx(st.poisson.sf(k - 1, lam), rel=1e-10)

    def test_misclassification_defaults(self):
        analysis = misclassification_probabilities(CodecConfig())
        assert analysis.count_threshold == 15
        assert analysis.p_minus_as_plus == pytest.approx(0.08345847293466, rel=1e-10)
        assert analysis.p_minus_as_zero == pytest.approx(math.exp(-10.0), rel=1e-12)
        # P(0 < Pois(20) < 15) = P(<=14) - P(=0)
        assert analysis.p_plus_as_minus == pytest.approx(
            st.poisson.cdf(14, 20) - st.poisson.pmf(0, 20), rel=1e-10
        )
        assert analysis.p_plus_as_zero == pytest.approx(math.exp(-20.0), rel=1e-12)

    def test_expected_word_error_formula(self):
        analysis = misclassification_probabilities(CodecConfig())
        expected = 1.0 - (1.0 - analysis.p_plus_error) ** 3 * (1.0 - analysis.p_minus_error) ** 2
        assert analysis.expected_word_error(3, 2, 100) == pytest.approx(expected)
        assert analysis.expected_word_error(0, 0, 50) == 0.0

    def test_probabilities_in_unit_interval(self):
        for cfg in (CodecConfig(), ALT):
            analysis = misclassification_probabilities(cfg)
            for p in (analysis.p_minus_as_plus, analysis.p_plus_as_minus,
                      analysis.p_minus_as_zero, analysis.p_plus_as_zero):
                assert 0.0 <= p <= 1.0


class TestRateSpread:
    def test_paper_values(self):
        spread = rate_spread(CodecConfig())
        assert spread["+1"][1] == pytest.approx(22.36, abs=0.005)
        assert spread["-1"][1] == pytest.approx(15.81, abs=0.005)

    def test_quadrupled_window_halves_sd(self):
        base = rate_spread(CodecConfig())
        wide = rate_spread(CodecConfig(window_s=0.8))
        assert wide["+1"][1] == pytest.approx(base["+1"][1] / 2)


class TestSuggestThreshold:
    def test_defaults_between_rates(self):
        hz, err = suggest_threshold(CodecConfig())
        assert 50.0 < hz < 100.0
        # brute-force the same search with scipy
        best = min(
            range(11, 21),
            key=lambda k: (st.poisson.sf(k - 1, 10) + st.poisson.cdf(k - 1, 20)
                           - st.poisson.pmf(0, 20), -k),
        )
        assert hz == best / 0.2
        assert err == pytest.approx(
            st.poisson.sf(best - 1, 10) + st.poisson.cdf(best - 1, 20) - st.poisson.pmf(0, 20),
            rel=1e-9,
        )

    def test_alt_preset_tiny_error(self):
        hz, err = suggest_threshold(ALT)
        assert 25.0 < hz < 200.0
        assert err < 1e-3


class TestSerialization:
    def test_jsonl_roundtrip(self, tmp_path):
        cfg = CodecConfig(seed=11)
        words = ["alpha", "beta"]
        rasters = [
            generate_raster(RateVector(np.array([100.0, 0.0, 50.0])), cfg, i)
            for i in range(2)
        ]
        path = str(tmp_path / "r.jsonl")
        write_raster_jsonl(path, words, rasters)
        back_words, back_rasters = read_raster_jsonl(path)
        assert back_words == words
        for orig, back in zip(rasters, back_rasters):
            assert back.window_s == pytest.approx(orig.window_s)
            assert np.array_equal(back.counts(), orig.counts())
            for t_orig, t_back in zip(orig.trains, back.trains):
                # export rounds to 3 decimal places in ms
                assert np.allclose(t_back, t_orig, atol=5.01e-7)
            assert np.array_equal(decode(back, cfg).values, decode(orig, cfg).values)

    def test_counts_csv(self, tmp_path):
        path = str(tmp_path / "c.csv")
        write_counts_csv(path, ["w"], [raster_from_counts([20, 0, 10])])
        assert open(path).read() == "w,20,0,10\n"
