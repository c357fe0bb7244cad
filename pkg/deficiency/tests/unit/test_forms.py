"""
Unit tests for the command option forms
"""

import pytest

from deficiency.core import Experiment
from deficiency.forms import (
    CertifyForm,
    CollapseForm,
    DeficiencyForm,
    FloorBinningForm,
    HierarchyForm,
    NftForm,
    NoiseSimulationForm,
    ShannonForm,
    VerifyPaperForm,
)
from deficiency.gaussian import Grid


@pytest.mark.forms
@pytest.mark.unit
class TestDeficiencyForm:
    """Test cases for DeficiencyForm"""

    def test_valid_files(self, merged_files):
        """Test that file options are cleaned into experiments"""
        form = DeficiencyForm(data={"source": merged_files["experiment"], "target": merged_files["image"]})

        assert form.is_valid(), form.errors
        assert isinstance(form.cleaned_data["source"], Experiment)
        assert form.cleaned_data["record"] is False
        assert form.cleaned_data["kernel"] is None

    def test_missing_file(self, merged_files, tmp_path):
        """Test the error names the missing path"""
        form = DeficiencyForm(data={"source": str(tmp_path / "nope.json"), "target": merged_files["image"]})

        assert not form.is_valid()
        assert "no such file" in form.errors["source"][0]

    def test_malformed_document(self, merged_files, write_json):
        """Test a syntax error is reported with its location"""
        path = write_json("broken.json", '{"parameters": [')
        form = DeficiencyForm(data={"source": path, "target": merged_files["image"]})

        assert not form.is_valid()
        assert f"{path}:1:" in form.errors["source"][0]

    def test_parameter_mismatch(self, merged_files, write_json, sharp_experiment):
        """Test experiments over different parameters"""
        path = write_json("sharp.json", sharp_experiment.as_dict())
        form = DeficiencyForm(data={"source": path, "target": merged_files["image"]})

        assert not form.is_valid()
        assert "same parameters" in form.non_field_errors()[0]

    @pytest.mark.parametrize("resolution", ["0", "2", "-0.1"])
    def test_oracle_resolution(self, merged_files, resolution):
        """Test resolutions outside (0, 1]"""
        form = DeficiencyForm(
            data={"source": merged_files["experiment"], "target": merged_files["image"], "oracle": resolution}
        )

        assert not form.is_valid()
        assert "oracle" in form.errors

    def test_kernel_option(self, merged_files):
        """Test a map passed as the kernel to score"""
        form = DeficiencyForm(
            data={
                "source": merged_files["experiment"],
                "target": merged_files["image"],
                "kernel": merged_files["map"],
            }
        )

        assert form.is_valid(), form.errors
        assert form.cleaned_data["kernel"].mapping == {"a": "0", "b": "0", "c": "1"}


@pytest.mark.forms
@pytest.mark.unit
class TestOtherForms:
    """Test cases for the remaining command forms"""

    def test_hierarchy_eps_default(self, merged_files):
        """Test eps defaults to 1e-6"""
        form = HierarchyForm(data={"experiment": merged_files["experiment"], "map": merged_files["map"]})

        assert form.is_valid(), form.errors
        assert form.cleaned_data["eps"] == 1e-6

    def test_hierarchy_negative_eps(self, merged_files):
        """Test a negative eps"""
        form = HierarchyForm(
            data={"experiment": merged_files["experiment"], "map": merged_files["map"], "eps": "-1"}
        )

        assert not form.is_valid()
        assert "eps" in form.errors

    def test_certify_defaults(self, merged_files):
        """Test experiments are accepted as exact tables"""
        form = CertifyForm(data={"source": merged_files["experiment"], "target": merged_files["image"]})

        assert form.is_valid(), form.errors
        assert form.cleaned_data["decision_class"] == "exhaustive"
        assert form.cleaned_data["samples"] is None

    def test_collapse_defaults(self):
        """Test the default scalings, grid and means"""
        form = CollapseForm(data={"sigma": "2"})

        assert form.is_valid(), form.errors
        assert len(form.cleaned_data["c_grid"]) == 41
        assert form.cleaned_data["grid"] == Grid(-6.0, 6.0, 0.5)
        assert form.cleaned_data["thetas"] == [-1.0, 0.0, 1.0]

    def test_collapse_options(self):
        """Test explicit scalings and means"""
        form = CollapseForm(data={"sigma": "3", "c_grid": "0:1:0.5", "grid": "-6:6:1", "thetas": "0,1"})

        assert form.is_valid(), form.errors
        assert form.cleaned_data["c_grid"] == [0.0, 0.5, 1.0]
        assert form.cleaned_data["grid"] == Grid(-6.0, 6.0, 1.0)
        assert form.cleaned_data["thetas"] == [0.0, 1.0]

    @pytest.mark.parametrize("data", [{"sigma": "1"}, {"sigma": "2", "grid": "1:2"}, {"sigma": "2", "thetas": "0,x"}])
    def test_collapse_errors(self, data):
        """Test sigma, grid and means validation"""
        assert not CollapseForm(data=data).is_valid()

    def test_floor_binning_defaults(self):
        """Test the default floor-binning grid"""
        form = FloorBinningForm(data={})

        assert form.is_valid(), form.errors
        assert form.cleaned_data["grid"] == Grid(-4.0, 5.0, 0.25)
        assert form.cleaned_data["thetas"] == [0.0, 0.5]

    def test_noise_simulation_grid(self):
        """Test the grid covers the means by six unit deviations"""
        form = NoiseSimulationForm(data={})

        assert form.is_valid(), form.errors
        assert form.cleaned_data["grid"] == Grid(-6.0, 6.1, 0.01)

    def test_noise_simulation_needs_two_means(self):
        """Test a single mean"""
        form = NoiseSimulationForm(data={"thetas": "0"})

        assert not form.is_valid()
        assert "two means" in form.errors["thetas"][0]

    def test_shannon_defaults(self):
        """Test the default blocklengths"""
        form = ShannonForm(data={"p": "0.1"})

        assert form.is_valid(), form.errors
        assert form.cleaned_data["repetition"] == [1, 3, 5, 7]

    @pytest.mark.parametrize("data", [{"p": "0.6"}, {"p": "0.1", "repetition": "1,2"}, {"p": "0.1", "repetition": "a"}])
    def test_shannon_errors(self, data):
        """Test crossover and blocklength validation"""
        assert not ShannonForm(data=data).is_valid()

    def test_nft_optional_target_map(self, merged_files):
        """Test one representation shared by both sides"""
        form = NftForm(
            data={
                "source": merged_files["experiment"],
                "target": merged_files["experiment"],
                "map": merged_files["map"],
            }
        )

        assert form.is_valid(), form.errors
        assert form.cleaned_data["target_map"] is None

    def test_verify_paper_seed(self):
        """Test a negative seed"""
        assert VerifyPaperForm(data={"seed": "4"}).is_valid()
        assert not VerifyPaperForm(data={"seed": "-4"}).is_valid()
