"""Equalizer training/inference contracts: KLMS, LMS, DFE."""

import math
from dataclasses import replace

import numpy as np
import pytest

from kafeq.channel import LINEAR_MILD, ChannelConfig, simulate_channel
from kafeq.equalizers import (
    DfeState,
    KlmsParams,
    KlmsState,
    LmsState,
    TapVectorizer,
    dfe_equalize,
    dfe_train,
    dfe_train_step,
    klms_equalize,
    klms_predict,
    klms_train,
    klms_train_step,
    lms_equalize,
    lms_train_step,
    make_tap_vectors,
)
from kafeq.pam import bits_to_pam4, generate_bits
from kafeq.rng import derive_seed


class TestTapVectorizer:
    def test_single_tap_windows(self):
        w = make_tap_vectors([1.0, 2.0, 3.0], TapVectorizer(1, 0))
        assert w.tolist() == [[1.0], [2.0], [3.0]]

    def test_centered_windows_with_padding(self):
        w = make_tap_vectors([1.0, 2.0, 3.0], TapVectorizer(3, 1))
        assert w.tolist() == [[0.0, 1.0, 2.0], [1.0, 2.0, 3.0], [2.0, 3.0, 0.0]]

    def test_window_count_equals_signal_length(self):
        rng = np.random.default_rng(0)
        for n_taps in (1, 2, 5, 8):
            x = rng.normal(size=50)
            assert make_tap_vectors(x, TapVectorizer(n_taps)).shape == (50, n_taps)

    def test_default_offset_is_centered(self):
        assert TapVectorizer(10).center_offset == 5
        assert TapVectorizer(7).center_offset == 3

    def test_rejects_short_signal(self):
        with pytest.raises(ValueError):
            make_tap_vectors([1.0, 2.0], TapVectorizer(3))

    def test_rejects_bad_offset(self):
        with pytest.raises(ValueError):
            TapVectorizer(4, 4)
        with pytest.raises(ValueError):
            TapVectorizer(4, -1)


class TestKlms:
    def test_empty_state_predicts_zero(self):
        state = KlmsState(KlmsParams(n_taps=3))
        assert klms_predict(state, [1.0, 2.0, 3.0]) == 0.0

    def test_single_entry_prediction(self):
        state = KlmsState(KlmsParams(mu=1.0, alpha=1.0, n_taps=1))
        state._append(np.array([0.0]), 0.5)
        assert klms_predict(state, [0.0]) == 0.5

    def test_two_step_hand_example(self):
        state = KlmsState(KlmsParams(mu=0.5, alpha=1.0, n_taps=1, train_len=2))
        e1 = klms_train_step(state, [1.0], 2.0)
        assert e1 == 2.0
        assert state.coefficients.tolist() == [1.0]
        e2 = klms_train_step(state, [1.0], 2.0)
        assert e2 == 1.0  # second prediction is exactly the stored coefficient

    def test_first_error_equals_first_target(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            taps = int(rng.integers(1, 6))
            state = KlmsState(KlmsParams(mu=float(rng.uniform(0.1, 1)), alpha=0.2, n_taps=taps))
            x = float(rng.normal())
            assert klms_train_step(state, rng.normal(size=taps), x) == x

    def test_dictionary_grows_one_per_step(self):
        rng = np.random.default_rng(2)
        state = KlmsState(KlmsParams(n_taps=4))
        for i in range(1, 100):
            klms_train_step(state, rng.normal(size=4), float(rng.normal()))
            assert len(state) == i
            assert state.dictionary.shape == (i, 4)
            assert state.coefficients.shape == (i,)

    def test_predict_matches_naive_expansion(self):
        # independent re-evaluation of the kernel-weighted sum over logged errors
        rng = np.random.default_rng(3)
        params = KlmsParams(mu=0.3, alpha=0.15, n_taps=5, train_len=50)
        state = KlmsState(params)
        inputs, errors = [], []
        for _ in range(50):
            c = rng.normal(size=5)
            x = float(rng.normal())
            errors.append(klms_train_step(state, c, x))
            inputs.append(c)
        for _ in range(20):
            q = rng.normal(size=5)
            naive = math.fsum(
                params.mu * e * math.exp(-params.alpha * float(np.sum((c - q) ** 2)))
                for c, e in zip(inputs, errors)
            )
            assert klms_predict(state, q) == pytest.approx(naive, abs=1e-12)

    def test_flat_kernel_degeneracy(self):
        # with a vanishing bandwidth every kernel value tends to 1, so the
        # prediction tends to the plain sum of coefficients
        rng = np.random.default_rng(4)
        params = KlmsParams(mu=0.4, alpha=1e-12, n_taps=3, train_len=30)
        state = KlmsState(params)
        for _ in range(30):
            klms_train_step(state, rng.normal(size=3), float(rng.normal()))
        q = rng.normal(size=3)
        assert klms_predict(state, q) == pytest.approx(float(np.sum(state.coefficients)), abs=1e-6)

    def test_train_single_step(self):
        state, mse = klms_train([1.0, 2.0], [2.0, 0.0], KlmsParams(n_taps=1, train_len=1))
        assert len(state) == 1
        assert mse.tolist() == [4.0]

    def test_train_deterministic(self):
        rng = np.random.default_rng(5)
        r = rng.normal(size=200)
        d = rng.normal(size=200)
        params = KlmsParams(mu=0.2, alpha=0.1, n_taps=4, train_len=150)
        s1, m1 = klms_train(r, d, params)
        s2, m2 = klms_train(r, d, params)
        assert np.array_equal(m1, m2)
        assert np.array_equal(s1.dictionary, s2.dictionary)
        assert np.array_equal(s1.coefficients, s2.coefficients)

    def test_equalize_is_frozen_and_total(self):
        rng = np.random.default_rng(6)
        r = rng.normal(size=300)
        d = rng.normal(size=300)
        params = KlmsParams(mu=0.2, alpha=0.1, n_taps=4, train_len=100)
        state, _ = klms_train(r, d, params)
        before = state.coefficients.copy()
        out1 = klms_equalize(state, r)
        out2 = klms_equalize(state, r)
        assert out1.size == r.size
        assert np.array_equal(out1, out2)
        assert np.array_equal(state.coefficients, before)
        assert len(state) == 100

    def test_equalize_matches_predict(self):
        rng = np.random.default_rng(7)
        r = rng.normal(size=120)
        d = rng.normal(size=120)
        params = KlmsParams(mu=0.2, alpha=0.3, n_taps=3, train_len=60)
        state, _ = klms_train(r, d, params)
        v = TapVectorizer(3)
        windows = make_tap_vectors(r, v)
        out = klms_equalize(state, r, v)
        for i in (0, 7, 42, 119):
            assert out[i] == klms_predict(state, windows[i])

    def test_rejects_insufficient_data(self):
        with pytest.raises(ValueError):
            klms_train([1.0] * 5, [1.0] * 5, KlmsParams(n_taps=2, train_len=10))

    def test_rejects_dimension_mismatch(self):
        state = KlmsState(KlmsParams(n_taps=3))
        with pytest.raises(ValueError):
            klms_predict(state, [1.0, 2.0])

    def test_untrained_equalize_rejected(self):
        state = KlmsState(KlmsParams(n_taps=3))
        with pytest.raises(ValueError):
            klms_equalize(state, np.ones(10))


class TestLms:
    def test_hand_step(self):
        state = LmsState(2, mu=0.1)
        e = lms_train_step(state, [1.0, 0.0], 1.0)
        assert e == 1.0
        assert state.weights.tolist() == [0.1, 0.0]

    def test_zero_error_fixed_point(self):
        state = LmsState(2, mu=0.1)
        state.weights[:] = [2.0, -1.0]
        e = lms_train_step(state, [0.5, 1.0], 0.0)
        assert e == 0.0
        assert state.weights.tolist() == [2.0, -1.0]

    def test_wiener_convergence_small(self):
        # converged weights approach the normal-equation solution on a fixed
        # linear channel
        n = 60_000
        taps = 5
        bits = generate_bits(derive_seed(10, 1), 2 * n)
        tx = bits_to_pam4(bits)
        cfg = replace(LINEAR_MILD.config, seed=derive_seed(10, 2))
        rx = simulate_channel(cfg, tx)
        windows = make_tap_vectors(rx, TapVectorizer(taps))
        r_mat = windows.T @ windows / n
        p_vec = windows.T @ tx / n
        w_star = np.linalg.solve(r_mat, p_vec)
        state = LmsState(taps, mu=1e-3)
        acc = np.zeros(taps)
        tail = 10_000
        for i in range(n):
            lms_train_step(state, windows[i], tx[i])
            if i >= n - tail:
                acc += state.weights
        assert np.linalg.norm(acc / tail - w_star) < 1e-2

    def test_equalize_applies_frozen_weights(self):
        rng = np.random.default_rng(8)
        r = rng.normal(size=100)
        state = LmsState(3, mu=0.01)
        state.weights[:] = [0.2, 1.0, -0.1]
        v = TapVectorizer(3)
        out = lms_equalize(state, r, v)
        windows = make_tap_vectors(r, v)
        expected = [float(np.dot(state.weights, row)) for row in windows]
        assert out.tolist() == expected

    def test_dimension_mismatch(self):
        state = LmsState(3)
        with pytest.raises(ValueError):
            lms_train_step(state, [1.0, 2.0], 0.0)


class TestDfe:
    def test_zero_weights_initial_step(self):
        state = DfeState(3, 2, mu=0.01)
        e, decision = dfe_train_step(state, [1.0, 2.0, 3.0], [1.0, -1.0], 3.0)
        assert e == 3.0  # y = 0 at initialization
        assert decision == 1.0  # the tie at 0 resolves to +1

    def test_no_feedback_reduces_to_lms(self):
        rng = np.random.default_rng(9)
        dfe = DfeState(4, 0, mu=0.05)
        lms = LmsState(4, mu=0.05)
        empty = np.zeros(0)
        for _ in range(200):
            c = rng.normal(size=4)
            x = float(rng.normal())
            e_dfe, _ = dfe_train_step(dfe, c, empty, x)
            e_lms = lms_train_step(lms, c, x)
            assert e_dfe == e_lms
        assert np.array_equal(dfe.ff_weights, lms.weights)

    def test_genie_closes_postcursor_channel(self):
        # channel r[i] = x[i] + 0.5*x[i-1], no noise: one forward tap and one
        # feedback tap cancel it exactly
        n = 5000
        cfg = ChannelConfig(h_pre=(1.0, 0.5), a2=0, a3=0, h_post=(1.0,), snr_db=math.inf, seed=0)
        tx = bits_to_pam4(generate_bits(21, 2 * n))
        rx = simulate_channel(cfg, tx)
        state, mse = dfe_train(rx, tx, n_fft=1, n_fbt=1, mu=0.01, train_len=n,
                               vectorizer=TapVectorizer(1, 0))
        assert np.sqrt(mse[-1]) < 1e-3
        assert state.ff_weights[0] == pytest.approx(1.0, abs=1e-3)
        assert state.fb_weights[0] == pytest.approx(0.5, abs=1e-3)

    def test_equalize_frozen_and_repeatable(self):
        rng = np.random.default_rng(10)
        r = rng.normal(size=300)
        d = np.asarray(bits_to_pam4(generate_bits(5, 600)))
        state, _ = dfe_train(r, d, n_fft=5, n_fbt=2, mu=0.01, train_len=200)
        ff_before = state.ff_weights.copy()
        soft1, dec1 = dfe_equalize(state, r)
        soft2, dec2 = dfe_equalize(state, r)
        assert np.array_equal(soft1, soft2)
        assert np.array_equal(dec1, dec2)
        assert np.array_equal(state.ff_weights, ff_before)

    def test_equalize_without_feedback_is_plain_filtering(self):
        rng = np.random.default_rng(11)
        r = rng.normal(size=120)
        state = DfeState(4, 0, mu=0.01)
        state.ff_weights[:] = [0.1, 0.8, 0.2, -0.1]
        soft, dec = dfe_equalize(state, r)
        lms = LmsState(4, mu=0.01)
        lms.weights[:] = state.ff_weights
        assert np.array_equal(soft, lms_equalize(lms, r))

    def test_decision_directed_mode_uses_decision_as_target(self):
        state = DfeState(1, 1, mu=0.1)
        state.ff_weights[:] = [1.0]
        e, decision = dfe_train_step(state, [0.8], [0.0], 99.0, mode="dd")
        assert decision == 1.0
        assert e == pytest.approx(0.2)  # target is the sliced decision, not 99

    def test_bad_mode_rejected(self):
        state = DfeState(1, 0)
        with pytest.raises(ValueError):
            dfe_train_step(state, [1.0], [], 0.0, mode="blind")

    def test_dimension_mismatch(self):
        state = DfeState(3, 2)
        with pytest.raises(ValueError):
            dfe_train_step(state, [1.0, 2.0], [0.0, 0.0], 0.0)
        with pytest.raises(ValueError):
            dfe_train_step(state, [1.0, 2.0, 3.0], [0.0], 0.0)
