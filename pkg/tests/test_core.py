import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lfodetect import (
    AnalysisConfig,
    Channel,
    ModeClass,
    MODE_BANDS,
    NonFiniteSample,
    NonPositiveDt,
    PronyMode,
    SampleWindow,
    WindowTooShort,
    validate_window,
    wrap_angle,
)


class TestValidateWindow:
    def test_accepts_standard_window(self, make_window):
        w = make_window(np.sin(np.arange(625) * 0.1), dt=0.04)
        assert validate_window(w) is w

    def test_too_short(self, make_window):
        with pytest.raises(WindowTooShort) as exc:
            validate_window(make_window([1.0, 2.0, 3.0]))
        assert exc.value.count == 3

    def test_non_finite_reports_first_index(self, make_window):
        samples = np.ones(20)
        samples[7] = np.nan
        with pytest.raises(NonFiniteSample) as exc:
            validate_window(make_window(samples))
        assert exc.value.index == 7

    def test_inf_rejected(self, make_window):
        samples = np.ones(20)
        samples[3] = np.inf
        with pytest.raises(NonFiniteSample) as exc:
            validate_window(make_window(samples))
        assert exc.value.index == 3

    @pytest.mark.parametrize("dt", [0.0, -0.04, math.nan, math.inf])
    def test_bad_dt(self, make_window, dt):
        with pytest.raises(NonPositiveDt):
            validate_window(make_window(np.ones(10), dt=dt))

    @given(st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=200))
    def test_any_finite_window_accepted(self, samples):
        w = SampleWindow("s", Channel.Frequency_Hz, 0, 0.04, np.array(samples))
        assert validate_window(w) is w


class TestSampleWindow:
    def test_samples_read_only(self, make_window):
        w = make_window(np.ones(10))
        with pytest.raises(ValueError):
            w.samples[0] = 5.0

    def test_frozen(self, make_window):
        w = make_window(np.ones(10))
        with pytest.raises(dataclasses.FrozenInstanceError):
            w.dt = 0.1

    def test_duration_and_times(self, make_window):
        w = make_window(np.ones(626), dt=0.04)
        assert w.duration == pytest.approx(25.0)
        assert w.times[1] == pytest.approx(0.04)
        assert w.count == 626

    def test_replace_samples_keeps_identity(self, make_window):
        w = make_window(np.ones(10), station="stn", t0_ms=55)
        w2 = w.replace_samples(np.zeros(10))
        assert (w2.station_id, w2.channel, w2.t0_ms, w2.dt) == ("stn", w.channel, 55, w.dt)
        assert np.all(w2.samples == 0.0)


class TestWrapAngle:
    @given(st.floats(-1e4, 1e4))
    def test_range_and_equivalence(self, theta):
        w = wrap_angle(theta)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-9)
        assert math.isclose(math.sin(w), math.sin(theta), abs_tol=1e-9)

    def test_pi_maps_to_pi(self):
        assert wrap_angle(math.pi) == math.pi
        assert wrap_angle(-math.pi) == math.pi
        assert wrap_angle(3 * math.pi) == math.pi


class TestPronyMode:
    def test_rejects_negative_amplitude(self):
        with pytest.raises(ValueError):
            PronyMode(amplitude=-1.0, damping=0.0, frequency=1.0, phase=0.0)

    def test_rejects_out_of_range_phase(self):
        with pytest.raises(ValueError):
            PronyMode(amplitude=1.0, damping=0.0, frequency=1.0, phase=4.0)

    def test_rejects_bad_energy_fraction(self):
        with pytest.raises(ValueError):
            PronyMode(amplitude=1.0, damping=0.0, frequency=1.0, phase=0.0, energy_fraction=1.5)


class TestModeBands:
    def test_declared_band_table(self):
        assert MODE_BANDS[ModeClass.InterArea] == (0.1, 1.0, True, False)
        assert MODE_BANDS[ModeClass.Local] == (1.0, 2.0, True, True)
        assert MODE_BANDS[ModeClass.Control] == (1.5, 8.0, False, True)
        lo, hi, lo_inc, hi_inc = MODE_BANDS[ModeClass.Torsional]
        assert lo == 10.0 and hi == math.inf and not lo_inc


class TestAnalysisConfig:
    def test_defaults(self):
        cfg = AnalysisConfig()
        assert cfg.emd_band_hz == (0.1, 2.0)
        assert cfg.max_sift_iterations == 50
        assert cfg.sift_sd_threshold == 0.2
        assert cfg.min_mode_amplitude_fraction == 0.02

    def test_bad_band(self):
        with pytest.raises(ValueError):
            AnalysisConfig(emd_band_hz=(2.0, 0.1))
        with pytest.raises(ValueError):
            AnalysisConfig(emd_band_hz=(0.0, 2.0))

    def test_order_resolution_honors_three_to_one_rule(self):
        cfg = AnalysisConfig()
        assert cfg.resolve_order(625) == 60
        assert cfg.resolve_order(90) == 30
        assert cfg.resolve_order(12) == 4
        assert AnalysisConfig(prony_order=8).resolve_order(625) == 8

    def test_match_tolerance_auto(self):
        cfg = AnalysisConfig()
        # 25 s window: Rayleigh limit 0.04 Hz, floor 0.05 wins
        assert cfg.resolve_match_tolerance(24.96) == pytest.approx(0.05)
        # short window: Rayleigh limit wins
        assert cfg.resolve_match_tolerance(10.0) == pytest.approx(0.1)
        assert AnalysisConfig(match_tolerance_hz=0.02).resolve_match_tolerance(25.0) == 0.02
