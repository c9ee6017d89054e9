import numpy as np
import pytest

from tsnovelty import nn
from tsnovelty.errors import ContractViolationError
from tsnovelty.nn import (
    MlpParams,
    WindowSpec,
    build_critic,
    build_decoder,
    build_encoder,
    critic_score,
    decode_window,
    encode_block,
    encode_window,
)


def zero_mlp(sizes, output_activation):
    layers = [(np.zeros((a, b)), np.zeros(b)) for a, b in zip(sizes, sizes[1:])]
    acts = ["tanh"] * (len(layers) - 1) + [output_activation]
    return MlpParams(layers, acts)


@pytest.fixture
def rng():
    return np.random.default_rng(123)


class TestArchitecture:
    def test_default_builders_have_expected_shape(self, rng):
        enc = build_encoder(20, rng)
        dec = build_decoder(20, rng)
        critic = build_critic(50, rng)
        for net in (enc, dec, critic):
            widths = [w.shape[1] for w, _ in net.layers]
            assert widths == [100, 50, 25, 1]
            assert net.activations[:-1] == ["tanh", "tanh", "tanh"]
        assert enc.activations[-1] == "tanh"
        assert dec.activations[-1] == "tanh"
        assert critic.activations[-1] == "linear"

    def test_mismatched_layer_chain_rejected(self):
        layers = [(np.zeros((3, 4)), np.zeros(4)), (np.zeros((5, 1)), np.zeros(1))]
        with pytest.raises(ContractViolationError):
            MlpParams(layers, ["tanh", "tanh"])

    def test_window_spec_validation(self):
        with pytest.raises(ContractViolationError):
            WindowSpec(0, 5)


class TestEncodeWindow:
    def test_zero_weights_give_zero(self):
        enc = zero_mlp([4, 3, 1], "tanh")
        assert encode_window(enc, np.ones(4)) == 0.0

    def test_output_strictly_inside_unit_interval(self, rng):
        enc = build_encoder(8, rng)
        for _ in range(50):
            v = encode_window(enc, rng.normal(scale=10, size=8))
            assert -1.0 < v < 1.0

    def test_wrong_window_length_rejected(self, rng):
        enc = build_encoder(8, rng)
        with pytest.raises(ContractViolationError):
            encode_window(enc, np.zeros(7))

    def test_future_samples_cannot_affect_encoding(self, rng):
        enc = build_encoder(5, rng)
        series = rng.normal(size=30)
        nu = encode_block(enc, series)
        bumped = series.copy()
        bumped[10:] += rng.normal(size=20)  # only indices after window 6's end
        nu2 = encode_block(enc, bumped)
        # window i ends at series index 4 + i; windows ending before index 10 unchanged
        np.testing.assert_array_equal(nu[:6], nu2[:6])


class TestDecodeWindow:
    def test_zero_weights_give_zero(self):
        dec = zero_mlp([4, 3, 1], "tanh")
        assert decode_window(dec, np.ones(4)) == 0.0

    def test_round_trip_block_count(self, rng):
        m, n = 6, 9
        enc, dec = build_encoder(m, rng), build_decoder(m, rng)
        segment = rng.normal(size=2 * m + n - 2)
        nu = encode_block(enc, segment)
        assert nu.size == m + n - 1
        xhat = nn.decode_series(dec, nu)
        assert xhat.size == n


class TestEncodeBlock:
    def test_memory_one_is_elementwise(self, rng):
        enc = build_encoder(1, rng)
        series = rng.normal(size=10)
        nu = encode_block(enc, series)
        np.testing.assert_allclose(
            nu, [encode_window(enc, series[i:i + 1]) for i in range(10)])

    def test_single_window(self, rng):
        enc = build_encoder(4, rng)
        seg = rng.normal(size=4)
        nu = encode_block(enc, seg)
        assert nu.shape == (1,)
        assert nu[0] == pytest.approx(encode_window(enc, seg[::-1]))

    def test_paper_default_dimensions(self, rng):
        enc = build_encoder(20, rng)
        nu = encode_block(enc, rng.normal(size=69))
        assert nu.shape == (50,)

    def test_short_segment_rejected(self, rng):
        enc = build_encoder(20, rng)
        with pytest.raises(ContractViolationError):
            encode_block(enc, np.zeros(19))

    def test_block_matches_window_by_window(self, rng):
        m = 5
        enc = build_encoder(m, rng)
        series = rng.normal(size=20)
        nu = encode_block(enc, series)
        for i, v in enumerate(nu):
            window = series[i:i + m][::-1]  # newest first
            assert v == pytest.approx(encode_window(enc, window))


class TestCriticScore:
    def test_zero_weights_score_zero(self):
        critic = zero_mlp([6, 4, 1], "linear")
        assert critic_score(critic, np.ones(6)) == 0.0

    def test_affine_in_last_layer_weights(self, rng):
        critic = build_critic(6, rng)
        block = rng.normal(size=6)
        s0 = critic_score(critic, block)
        w, b = critic.layers[-1]
        critic.layers[-1] = (2.0 * w, b)
        s1 = critic_score(critic, block)
        critic.layers[-1] = (3.0 * w, b)
        s2 = critic_score(critic, block)
        assert s2 - s1 == pytest.approx(s1 - s0)

    def test_deterministic(self, rng):
        critic = build_critic(6, rng)
        block = rng.normal(size=6)
        assert critic_score(critic, block) == critic_score(critic, block)

    def test_wrong_length_rejected(self, rng):
        critic = build_critic(6, rng)
        with pytest.raises(ContractViolationError):
            critic_score(critic, np.zeros(5))


def test_causality_bit_exact_randomized(rng):
    # perturbing any sample after the block's last window leaves it bit-identical
    m = 7
    enc = build_encoder(m, rng)
    series = rng.normal(size=50)
    full = encode_block(enc, series)
    for _ in range(100):
        cut = rng.integers(m, 50)
        bumped = series.copy()
        bumped[cut:] = rng.normal(size=50 - cut) * 100
        part = encode_block(enc, bumped)
        assert np.array_equal(full[:cut - m + 1], part[:cut - m + 1])
