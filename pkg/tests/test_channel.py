"""Wiener-Hammerstein channel simulation contracts."""

import math
from dataclasses import replace

import numpy as np
import pytest

from kafeq.channel import (
    LINEAR_MILD,
    NONLINEAR_REFERENCE,
    ChannelConfig,
    add_awgn,
    apply_fir,
    apply_nonlinearity,
    get_preset,
    simulate_channel,
)

IDENTITY = ChannelConfig(h_pre=(1.0,), a2=0.0, a3=0.0, h_post=(1.0,), snr_db=math.inf, seed=0)


class TestApplyFir:
    def test_impulse_response(self):
        assert apply_fir([1, 0, 0], [0.9, 0.3]).tolist() == [0.9, 0.3, 0.0]

    def test_identity_filter(self):
        x = np.array([0.3, -1.2, 4.0])
        assert apply_fir(x, [1.0]).tolist() == x.tolist()

    def test_hand_convolution(self):
        assert apply_fir([1, 1], [0.5, 0.5]).tolist() == [0.5, 1.0]

    def test_output_length(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=37)
        assert apply_fir(x, [1.0, 0.2, 0.1, 0.05]).size == 37

    def test_associativity(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=200)
        h1 = rng.normal(size=4)
        h2 = rng.normal(size=3)
        a = apply_fir(apply_fir(x, h1), h2)
        b = apply_fir(x, np.convolve(h1, h2))
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            apply_fir([], [1.0])
        with pytest.raises(ValueError):
            apply_fir([1.0], [])


class TestNonlinearity:
    def test_cubic_point(self):
        assert apply_nonlinearity([2.0], 0.0, 0.1).tolist() == [pytest.approx(2.8)]

    def test_identity_when_disabled(self):
        x = np.array([0.1, -2.0, 3.0])
        assert apply_nonlinearity(x, 0.0, 0.0).tolist() == x.tolist()

    def test_quadratic_point(self):
        assert apply_nonlinearity([-1.0], 0.2, 0.0).tolist() == [pytest.approx(-0.8)]


class TestAwgn:
    def test_noise_disabled(self):
        x = np.array([1.0, -1.0, 2.0])
        assert add_awgn(x, math.inf, 5).tolist() == x.tolist()

    def test_deterministic(self):
        x = np.linspace(-1, 1, 100)
        assert np.array_equal(add_awgn(x, 10.0, 7), add_awgn(x, 10.0, 7))

    def test_noise_variance(self):
        x = np.ones(10**6)
        noise = add_awgn(x, 20.0, 123) - x
        assert np.var(noise) == pytest.approx(0.01, rel=0.02)

    def test_rejects_zero_power(self):
        with pytest.raises(ValueError):
            add_awgn(np.zeros(10), 10.0, 0)


class TestSimulateChannel:
    def test_identity_chain(self):
        x = np.array([3.0, -1.0, 1.0, -3.0])
        assert simulate_channel(IDENTITY, x).tolist() == x.tolist()

    def test_constant_input_steady_state(self):
        cfg = replace(NONLINEAR_REFERENCE.config, snr_db=math.inf)
        out = simulate_channel(cfg, np.full(50, 3.0))
        # steady state computed by hand through the cascade
        u = 3.0 * sum(cfg.h_pre)
        g = u + cfg.a2 * u**2 + cfg.a3 * u**3
        expected = g * sum(cfg.h_post)
        assert out[-1] == pytest.approx(expected, rel=1e-12)
        assert np.allclose(out[10:], expected, rtol=1e-12)

    def test_impulse_through_linear_preset(self):
        cfg = replace(LINEAR_MILD.config, snr_db=math.inf)
        x = np.zeros(8)
        x[0] = 1.0
        out = simulate_channel(cfg, x)
        expected = np.zeros(8)
        cascade = np.convolve(cfg.h_pre, cfg.h_post)
        expected[: cascade.size] = cascade
        assert np.allclose(out, expected, rtol=1e-12, atol=0)

    def test_linearity_without_distortion(self):
        cfg = replace(LINEAR_MILD.config, snr_db=math.inf)
        rng = np.random.default_rng(2)
        x = rng.normal(size=64)
        y = rng.normal(size=64)
        lhs = simulate_channel(cfg, 2.0 * x + 0.5 * y)
        rhs = 2.0 * simulate_channel(cfg, x) + 0.5 * simulate_channel(cfg, y)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_determinism(self):
        cfg = replace(NONLINEAR_REFERENCE.config, seed=99)
        rng = np.random.default_rng(3)
        x = rng.choice([-3.0, -1.0, 1.0, 3.0], size=500)
        assert np.array_equal(simulate_channel(cfg, x), simulate_channel(cfg, x))

    def test_output_length(self):
        for n in (1, 2, 17, 256):
            x = np.ones(n) * 3.0
            assert simulate_channel(NONLINEAR_REFERENCE.config, x).size == n

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            simulate_channel(IDENTITY, [])


class TestPresets:
    def test_lookup(self):
        assert get_preset("LINEAR_MILD") == LINEAR_MILD.config
        assert get_preset("NONLINEAR_REFERENCE") == NONLINEAR_REFERENCE.config

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            get_preset("NO_SUCH_PRESET")

    def test_preset_values_are_fixed(self):
        c = NONLINEAR_REFERENCE.config
        assert c.h_pre == (1.0, 0.35, 0.1)
        assert (c.a2, c.a3) == (0.08, 0.06)
        assert c.h_post == (1.0, 0.2)
        assert c.snr_db == 18.0
        m = LINEAR_MILD.config
        assert m.h_pre == (1.0, 0.25)
        assert (m.a2, m.a3) == (0.0, 0.0)
        assert m.h_post == (1.0,)
        assert m.snr_db == 18.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ChannelConfig(h_pre=(), a2=0, a3=0, h_post=(1.0,), snr_db=10, seed=0)
        with pytest.raises(ValueError):
            ChannelConfig(h_pre=(1.0,), a2=0, a3=0, h_post=(1.0,), snr_db=float("nan"), seed=0)
