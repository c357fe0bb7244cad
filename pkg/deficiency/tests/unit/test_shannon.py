"""
Unit tests for BSC coding read as experiment simulation
"""

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from deficiency.exceptions import DimensionError, GuardError, PropertyFailure
from deficiency.shannon import (
    ChannelSpec,
    Codebook,
    best_deterministic_decoder,
    binary_entropy,
    bsc_capacity,
    bsc_kernel,
    coding_deficiency,
    coding_experiments,
    lp_coding_deficiency,
    majority_decoder,
    ml_decoder,
    repetition_codebook,
    repetition_sweep,
)

LP_TOLERANCE = 1e-7


@pytest.mark.shannon
@pytest.mark.unit
class TestChannelSpec:
    """Test cases for ChannelSpec and Codebook"""

    def test_words(self):
        """Test the output alphabet is every n-bit string"""
        assert ChannelSpec(0.1, 2).words == ("00", "01", "10", "11")

    @pytest.mark.parametrize(
        "crossover, blocklength, kind",
        [(0.6, 3, "binary-symmetric"), (-0.1, 3, "binary-symmetric"), (0.1, 0, "binary-symmetric"), (0.1, 3, "erasure")],
    )
    def test_invalid_channels(self, crossover, blocklength, kind):
        """Test crossover, blocklength and kind validation"""
        with pytest.raises(ValidationError):
            ChannelSpec(crossover, blocklength, kind)

    def test_blocklength_guard(self):
        """Test the output space limit"""
        with pytest.raises(GuardError):
            ChannelSpec(0.1, 17)

    def test_repetition_codebook(self):
        """Test the two-word repetition code"""
        cb = repetition_codebook(3)

        assert cb.codewords == ("000", "111")
        assert cb.messages == ("m0", "m1")
        assert cb.rate == pytest.approx(1 / 3)

    @pytest.mark.parametrize("codewords", [(), ("01", "011"), ("01", "01"), ("0a",)])
    def test_invalid_codebooks(self, codewords):
        """Test empty, ragged, repeated and non-binary codebooks"""
        with pytest.raises(ValidationError):
            Codebook(codewords)

    def test_message_count(self):
        """Test one message per codeword"""
        with pytest.raises(DimensionError):
            Codebook(("00", "11"), ("only",))

    def test_blocklength_mismatch(self):
        """Test codewords longer than the channel block"""
        with pytest.raises(DimensionError, match="blocklength"):
            coding_experiments(repetition_codebook(3), ChannelSpec(0.1, 5))

    def test_bsc_kernel(self):
        """Test the product channel on two bits"""
        kernel = bsc_kernel(ChannelSpec(0.1, 2))

        assert kernel.matrix.shape == (4, 4)
        assert kernel.matrix[0, 0] == pytest.approx(0.81)
        assert kernel.matrix[0, 3] == pytest.approx(0.01)
        np.testing.assert_allclose(kernel.matrix.sum(axis=1), 1.0)


@pytest.mark.shannon
@pytest.mark.unit
class TestCodingDeficiency:
    """Test cases for decoders and their simulation error"""

    def test_majority_decoder(self):
        """Test the worst-message error of the three-fold repetition code"""
        cb = repetition_codebook(3)
        result = coding_deficiency(cb, ChannelSpec(0.1, 3), majority_decoder(cb))

        # 3 p^2 (1 - p) + p^3
        assert result.deficiency == pytest.approx(0.028, abs=1e-12)
        assert result.per_message_errors == pytest.approx((0.028, 0.028))
        assert result.average_error == pytest.approx(0.028)

    def test_ml_decoder_matches_majority(self):
        """Test ML decoding agrees with majority vote for odd n"""
        cb, spec = repetition_codebook(5), ChannelSpec(0.1, 5)

        assert np.array_equal(ml_decoder(cb, spec).kernel.matrix, majority_decoder(cb).kernel.matrix)

    def test_lp_over_randomized_decoders(self):
        """Test randomization does not beat majority vote"""
        report = lp_coding_deficiency(repetition_codebook(3), ChannelSpec(0.1, 3))

        assert report.value == pytest.approx(0.028, abs=LP_TOLERANCE)

    def test_best_deterministic_decoder(self):
        """Test the exhaustive search finds the majority error"""
        decoder, error = best_deterministic_decoder(repetition_codebook(3), ChannelSpec(0.1, 3))

        assert error == pytest.approx(0.028, abs=1e-12)
        assert decoder.kind == "deterministic"

    @pytest.mark.parametrize("p", [0.1, 0.3])
    @pytest.mark.parametrize(
        "codewords",
        [
            ("0", "1"),
            ("00", "11"),
            ("00", "01", "11"),
            ("00", "01", "10", "11"),
            ("000", "111"),
            ("000", "011", "101"),
            ("000", "011", "101", "110"),
            ("0000", "1111"),
            ("0011", "1100"),
        ],
    )
    def test_ml_decoder_minimizes_average_error(self, codewords, p):
        """Test no deterministic decoder beats ML on the average message error"""
        cb = Codebook(codewords)
        spec = ChannelSpec(p, cb.blocklength)

        _, best = best_deterministic_decoder(cb, spec, "average")
        ml = coding_deficiency(cb, spec, ml_decoder(cb, spec))

        assert ml.average_error == pytest.approx(best, abs=1e-12)

    def test_unknown_criterion(self):
        """Test the search criterion is checked"""
        with pytest.raises(ValidationError, match="criterion"):
            best_deterministic_decoder(repetition_codebook(1), ChannelSpec(0.1, 1), "median")

    def test_search_guard(self, settings):
        """Test the decoder search refuses large spaces"""
        settings.LECAM_RULE_ENUMERATION_LIMIT = 100

        with pytest.raises(GuardError):
            best_deterministic_decoder(repetition_codebook(3), ChannelSpec(0.1, 3))

    def test_pure_noise_channel(self):
        """Test p = 0.5 leaves every decoder at error one half"""
        cb = repetition_codebook(3)

        assert coding_deficiency(cb, ChannelSpec(0.5, 3), majority_decoder(cb)).deficiency == pytest.approx(0.5)

    def test_identity_failure_is_raised(self, mocker):
        """Test a simulation error disagreeing with the miss probability"""
        mocker.patch("deficiency.shannon.tv_distance", return_value=np.array([0.9, 0.9]))
        cb = repetition_codebook(3)

        with pytest.raises(PropertyFailure, match="maximum message error"):
            coding_deficiency(cb, ChannelSpec(0.1, 3), majority_decoder(cb))

    def test_decoder_shape(self):
        """Test a decoder built for another blocklength"""
        with pytest.raises(DimensionError):
            coding_deficiency(repetition_codebook(3), ChannelSpec(0.1, 3), majority_decoder(repetition_codebook(1)))


@pytest.mark.shannon
@pytest.mark.unit
class TestRepetitionSweep:
    """Test cases for the repetition sweep and capacity"""

    def test_sweep_values(self):
        """Test Pe for n = 1, 3, 5 at p = 0.1"""
        rows = repetition_sweep(0.1, [1, 3, 5])

        assert [row["n"] for row in rows] == [1, 3, 5]
        assert [row["Pe"] for row in rows] == pytest.approx([0.1, 0.028, 0.00856], abs=1e-12)
        assert rows[1]["rate"] == pytest.approx(1 / 3)
        assert rows[0]["capacity"] == pytest.approx(bsc_capacity(0.1))

    def test_pure_noise_sweep(self):
        """Test that p = 0.5 skips the monotonicity check"""
        rows = repetition_sweep(0.5, [1, 3])

        assert [row["Pe"] for row in rows] == pytest.approx([0.5, 0.5])
        assert rows[0]["capacity"] == 0.0

    @pytest.mark.parametrize("n_values", [[], [2], [1, 4], [0]])
    def test_invalid_blocklengths(self, n_values):
        """Test that blocklengths must be odd and positive"""
        with pytest.raises(ValidationError):
            repetition_sweep(0.1, n_values)

    def test_capacity(self):
        """Test the binary entropy endpoints and a midpoint"""
        assert bsc_capacity(0.0) == 1.0
        assert bsc_capacity(0.5) == pytest.approx(0.0, abs=1e-15)
        assert binary_entropy(0.11) == pytest.approx(0.4999, abs=1e-3)
