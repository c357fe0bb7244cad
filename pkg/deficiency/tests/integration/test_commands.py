"""
Integration tests for the management commands: options, JSON/CSV output and exit codes
"""

import json
from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from deficiency import codec


def run(name, *args):
    stdout, stderr = StringIO(), StringIO()
    call_command(name, *args, stdout=stdout, stderr=stderr)
    return stdout.getvalue(), stderr.getvalue()


@pytest.fixture
def chain_file(write_json, sharp_experiment, noise_kernel):
    """A one-step chain whose approximate oracle adds a flip"""
    from deficiency.composition import ChainSpec
    from deficiency.core import Kernel

    spec = ChainSpec(sharp_experiment, (Kernel.identity(("x0", "x1")),), (noise_kernel,), (0.25,))
    return write_json("chain.json", codec.dumps(spec))


@pytest.mark.cli
@pytest.mark.integration
class TestDeficiencyCommand:
    """Test cases for the deficiency command"""

    def test_forward_direction(self, merged_files):
        """Test the experiment simulates its image"""
        stdout, stderr = run(
            "deficiency", "--source", merged_files["experiment"], "--target", merged_files["image"]
        )
        payload = json.loads(stdout)

        assert payload["value"] == pytest.approx(0.0, abs=1e-7)
        assert payload["solver_status"] == "optimal"
        assert payload["direction"] == ["P", "Q"]
        assert "delta(P -> Q)" in stderr

    def test_output_is_canonical(self, merged_files):
        """Test stdout is the canonical JSON of the payload and stable across runs"""
        args = ("--source", merged_files["image"], "--target", merged_files["experiment"])
        first, _ = run("deficiency", *args)
        second, _ = run("deficiency", *args)

        assert first == second
        assert first == codec.dumps(json.loads(first))

    def test_both_directions(self, merged_files):
        """Test the Le Cam distance is the backward deficiency"""
        stdout, _ = run(
            "deficiency", "--source", merged_files["experiment"], "--target", merged_files["image"], "--both"
        )
        payload = json.loads(stdout)

        assert payload["Delta"] == payload["backward"]["value"]
        assert payload["Delta"] > 0.05

    def test_oracle_cross_check(self, merged_files):
        """Test the grid oracle lands within its resolution"""
        stdout, _ = run(
            "deficiency",
            "--source",
            merged_files["image"],
            "--target",
            merged_files["experiment"],
            "--oracle",
            "0.05",
        )
        oracle = json.loads(stdout)["oracle"]

        assert oracle["resolution"] == 0.05
        assert oracle["difference"] <= 0.05 + 1e-7

    def test_kernel_evaluation(self, merged_files):
        """Test the merging map is an optimal kernel"""
        stdout, _ = run(
            "deficiency",
            "--source",
            merged_files["experiment"],
            "--target",
            merged_files["image"],
            "--kernel",
            merged_files["map"],
        )

        assert json.loads(stdout)["kernel"]["excess"] == pytest.approx(0.0, abs=1e-7)

    def test_malformed_json(self, merged_files, write_json):
        """Test invalid input exits with code 2 and the error location"""
        path = write_json("broken.json", '{"parameters": ["0", "1"],\n  "outcomes": ]}')

        with pytest.raises(CommandError) as excinfo:
            run("deficiency", "--source", path, "--target", merged_files["image"])

        assert excinfo.value.returncode == 2
        assert f"{path}:2:15" in str(excinfo.value)

    def test_parameter_mismatch(self, merged_files, write_json, sharp_experiment):
        """Test experiments over different parameters exit with code 2"""
        path = write_json("sharp.json", sharp_experiment.as_dict())

        with pytest.raises(CommandError) as excinfo:
            run("deficiency", "--source", path, "--target", merged_files["image"])

        assert excinfo.value.returncode == 2

    def test_oracle_guard(self, merged_files, settings):
        """Test the oracle budget turns into an input error"""
        settings.LECAM_ORACLE_MAX_EVALUATIONS = 10

        with pytest.raises(CommandError) as excinfo:
            run(
                "deficiency",
                "--source",
                merged_files["experiment"],
                "--target",
                merged_files["experiment"],
                "--oracle",
                "0.1",
            )

        assert excinfo.value.returncode == 2


@pytest.mark.cli
@pytest.mark.integration
class TestAnalysisCommands:
    """Test cases for hierarchy, certify, compose and nft"""

    def test_hierarchy(self, merged_files):
        """Test the strict gap between testing and distortion at eps 0.01"""
        stdout, stderr = run(
            "hierarchy", "--experiment", merged_files["experiment"], "--map", merged_files["map"], "--eps", "0.01"
        )
        payload = json.loads(stdout)

        assert payload["levels"]["testing_equivalence"] is True
        assert payload["levels"]["likelihood_distortion"] is False
        assert "testing_equivalence" in stderr

    def test_hierarchy_default_eps_on_two_coins(self, write_json):
        """Test the number of heads holds every level without --eps"""
        rows = [[(1 - p) * (1 - p), (1 - p) * p, p * (1 - p), p * p] for p in (0.3, 0.7)]
        experiment = write_json(
            "coins.json",
            {"name": "coins", "parameters": ["0.3", "0.7"], "outcomes": ["00", "01", "10", "11"], "rows": rows},
        )
        bit_sum = write_json("sum.json", {"mapping": {"00": "0", "01": "1", "10": "1", "11": "2"}})

        stdout, _ = run("hierarchy", "--experiment", experiment, "--map", bit_sum)
        payload = json.loads(stdout)

        assert payload["eps"] == 1e-6
        assert all(payload["levels"].values())

    def test_certify_exact_tables(self, merged_files):
        """Test experiments read as exact frequencies"""
        stdout, _ = run("certify", "--source", merged_files["experiment"], "--target", merged_files["image"])
        payload = json.loads(stdout)

        assert payload["delta_hat"] == pytest.approx(0.0, abs=1e-12)
        assert payload["seed"] is None
        assert payload["simulable"] is None

    def test_certify_sampled_tables(self, merged_files):
        """Test sampling is reproducible for one seed"""
        args = (
            "--source", merged_files["experiment"],
            "--target", merged_files["image"],
            "--samples", "200",
            "--seed", "5",
            "--epsilon", "0.5",
        )
        first, _ = run("certify", *args)
        second, _ = run("certify", *args)

        assert first == second
        assert json.loads(first)["seed"] == 5
        assert json.loads(first)["simulable"] is True

    def test_certify_unknown_class(self, merged_files):
        """Test only the exhaustive class is built in"""
        with pytest.raises(CommandError) as excinfo:
            run(
                "certify",
                "--source", merged_files["experiment"],
                "--target", merged_files["image"],
                "--class", "linear",
            )

        assert excinfo.value.returncode == 2

    def test_compose(self, chain_file):
        """Test a one-step chain meets its summed bound"""
        stdout, stderr = run("compose", "--chain", chain_file)
        payload = json.loads(stdout)

        assert payload["holds"] is True
        assert payload["eps_sum"] == pytest.approx(0.2)
        assert payload["declared_eps_cover"] is True
        assert "<=" in stderr

    def test_compose_failure_exits_3(self, chain_file, mocker):
        """Test a violated bound exits with code 3 after writing the report"""
        from deficiency.composition import CompositionReport, StepMeasurement

        mocker.patch(
            "deficiency.management.commands.compose.verify_composition_bound",
            return_value=CompositionReport(0.5, (StepMeasurement(0.1, 0.0),)),
        )
        stdout, stderr = StringIO(), StringIO()

        with pytest.raises(CommandError) as excinfo:
            call_command("compose", "--chain", chain_file, stdout=stdout, stderr=stderr)

        assert excinfo.value.returncode == 3
        assert json.loads(stdout.getvalue())["holds"] is False
        assert ">" in stderr.getvalue()

    def test_nft_shared_map(self, merged_files):
        """Test one map applied to both sides"""
        stdout, _ = run(
            "nft",
            "--source", merged_files["experiment"],
            "--target", merged_files["experiment"],
            "--map", merged_files["map"],
        )
        payload = json.loads(stdout)

        assert payload["holds"] is True
        assert payload["invariance_error"] == 0.0

    def test_nft_pair_of_maps(self, merged_files, write_json):
        """Test a separate map for a target on other outcomes"""
        relabel = write_json("relabel.json", {"mapping": {"0": "0", "1": "1"}})

        stdout, _ = run(
            "nft",
            "--source", merged_files["experiment"],
            "--target", merged_files["image"],
            "--map", merged_files["map"],
            "--target-map", relabel,
        )

        assert json.loads(stdout)["slack"] == pytest.approx(0.0, abs=1e-6)


@pytest.mark.cli
@pytest.mark.integration
class TestTableCommands:
    """Test cases for shannon and gaussian"""

    def test_shannon_csv(self):
        """Test the repetition sweep as CSV"""
        stdout, stderr = run("shannon", "--p", "0.1", "--repetition", "1,3,5")
        lines = stdout.split("\r\n")

        assert lines[0] == "n,rate,Pe,Pe_average,capacity"
        n, rate, pe = lines[2].split(",")[:3]
        assert (n, rate) == ("3", "0.33333333333333331")
        assert float(pe) == pytest.approx(0.028, abs=1e-12)
        assert lines[-1] == ""
        assert "Pe(5)=0.00856" in stderr

    def test_shannon_even_blocklength(self):
        """Test even blocklengths exit with code 2"""
        with pytest.raises(CommandError) as excinfo:
            run("shannon", "--p", "0.1", "--repetition", "2")

        assert excinfo.value.returncode == 2

    def test_gaussian_collapse(self, tmp_path):
        """Test the collapse sweep with a CSV copy"""
        out = tmp_path / "collapse.csv"

        stdout, _ = run(
            "gaussian", "collapse", "--sigma=2", "--c-grid=0:1:0.5", "--grid=-6:6:1", "--out", str(out)
        )
        payload = json.loads(stdout)

        assert [row["c"] for row in payload["rows"]] == [0.0, 0.5, 1.0]
        assert payload["rows"][0]["invariance_error"] == 0.0
        assert out.read_text().startswith(",".join(payload["columns"]))
        assert all(row["solver_status"] == "optimal" for row in payload["rows"])

    def test_gaussian_collapse_flags_unsolved_rows(self, mocker):
        """Test a row the solver could not finish exits with code 3"""
        from deficiency.gaussian import CollapseRow

        rows = [
            CollapseRow(0.0, 0.0, 0.4, 0.2, 0.1),
            CollapseRow(1.0, 0.3, 0.0, 0.0, 0.1, solver_status="tolerance-limited"),
        ]
        mocker.patch("deficiency.management.commands.gaussian.invariance_collapse_sweep", return_value=rows)

        with pytest.raises(CommandError) as excinfo:
            run("gaussian", "collapse", "--sigma=2", "--c-grid=0:1:1", "--grid=-6:6:1")

        assert excinfo.value.returncode == 3

    def test_gaussian_floor_binning(self):
        """Test the default floor-binning report"""
        stdout, _ = run("gaussian", "ce1")
        payload = json.loads(stdout)

        assert payload["sufficient"] is False
        assert payload["distortion_finite"] is True

    def test_gaussian_bad_grid(self):
        """Test a floor grid with a fractional lower edge"""
        with pytest.raises(CommandError) as excinfo:
            run("gaussian", "ce1", "--grid=-4.5:5:0.25")

        assert excinfo.value.returncode == 2

    @pytest.mark.slow
    def test_gaussian_noise_simulation(self):
        """Test the narrow-to-wide simulation on a coarse grid"""
        stdout, _ = run("gaussian", "ce3", "--step", "0.05")
        payload = json.loads(stdout)

        assert payload["simulation"]["within_bound"] is True
        assert payload["pairwise_gap"]["holds"] is True
        assert payload["pairwise_gap"]["lower_bound"] == pytest.approx(0.1715, abs=1e-4)


@pytest.mark.django_db
@pytest.mark.cli
@pytest.mark.integration
class TestRecordedRuns:
    """Test cases for --record"""

    def test_manifest_is_written(self, merged_files):
        """Test a recorded run stores its inputs and stdout digest"""
        from deficiency.models import RunManifest
        from deficiency.runs import stdout_digest

        stdout, _ = run(
            "deficiency", "--source", merged_files["experiment"], "--target", merged_files["image"], "--record"
        )
        manifest = RunManifest.objects.get()

        assert manifest.subcommand == "deficiency"
        assert manifest.inputs == [merged_files["experiment"], merged_files["image"]]
        assert manifest.options == {"both": False, "oracle": None}
        assert manifest.stdout_sha256 == stdout_digest(stdout)
        assert manifest.exit_code == 0

    def test_identical_runs_reproduce(self):
        """Test two recorded sweeps match"""
        from deficiency.models import RunManifest

        run("shannon", "--p", "0.2", "--repetition", "1,3", "--record")
        run("shannon", "--p", "0.2", "--repetition", "1,3", "--record")
        first, second = RunManifest.objects.all()

        assert first.reproduces(second)
        assert first.inputs == []

    def test_failed_run_is_recorded(self, chain_file, mocker):
        """Test the manifest keeps exit code 3"""
        from deficiency.composition import CompositionReport, StepMeasurement
        from deficiency.models import RunManifest

        mocker.patch(
            "deficiency.management.commands.compose.verify_composition_bound",
            return_value=CompositionReport(0.5, (StepMeasurement(0.1, 0.0),)),
        )

        with pytest.raises(CommandError):
            run("compose", "--chain", chain_file, "--record")

        assert RunManifest.objects.get().exit_code == 3

    def test_gaussian_records_outputs(self, tmp_path):
        """Test the CSV path is stored as an output"""
        from deficiency.models import RunManifest

        out = str(tmp_path / "rows.csv")
        run("gaussian", "collapse", "--sigma=2", "--c-grid=0:1:1", "--grid=-6:6:1", "--out", out, "--record")
        manifest = RunManifest.objects.get()

        assert manifest.subcommand == "gaussian"
        assert manifest.outputs == [out]
