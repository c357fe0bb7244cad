"""
Unit tests for the JSON readers and the canonical writers
"""

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from deficiency import codec
from deficiency.composition import ChainSpec
from deficiency.core import DeterministicMap, Experiment, Kernel
from deficiency.risk import DETERMINISTIC, RANDOMIZED, DecisionProblem, DecisionRule, FrequencyTable


@pytest.mark.core
@pytest.mark.unit
class TestWriter:
    """Test cases for the canonical JSON and CSV writers"""

    @pytest.mark.parametrize(
        "value, text",
        [
            (0.1, "0.10000000000000001"),
            (1.0, "1.0"),
            (-2.5, "-2.5"),
            (float("inf"), '"inf"'),
            (float("-inf"), '"-inf"'),
        ],
    )
    def test_format_real(self, value, text):
        """Test 17 significant digits and quoted infinities"""
        assert codec.format_real(value) == text

    def test_layout(self):
        """Test sorted keys, two-space indent and one-line scalar lists"""
        text = codec.dumps({"b": [1.0, 2], "a": {"flag": True, "none": None}})

        assert text == (
            "{\n"
            '  "a": {\n'
            '    "flag": true,\n'
            '    "none": null\n'
            "  },\n"
            '  "b": [1.0, 2]\n'
            "}\n"
        )

    def test_nested_rows(self):
        """Test a matrix is written one row per line"""
        assert codec.dumps({"rows": [[0.5, 0.5], []]}) == '{\n  "rows": [\n    [0.5, 0.5],\n    []\n  ]\n}\n'

    def test_numpy_and_objects(self, merged_experiment):
        """Test numpy scalars and objects with as_dict"""
        assert codec.dumps(np.float64(0.25)) == "0.25\n"
        assert codec.dumps(np.bool_(True)) == "true\n"
        assert codec.dumps((1, 2)) == "[1, 2]\n"
        assert '"parameters": ["0", "1"]' in codec.dumps(merged_experiment)

    def test_byte_stable(self, merged_experiment):
        """Test two writes of one value are identical"""
        assert codec.dumps(merged_experiment.as_dict()) == codec.dumps(merged_experiment.as_dict())

    def test_csv_table(self):
        """Test CRLF rows with booleans and reals formatted like JSON"""
        text = codec.csv_table(("n", "ok", "x"), [{"n": 1, "ok": True, "x": 0.1}, {"n": 3, "ok": False, "x": 1.0}])

        assert text == "n,ok,x\r\n1,true,0.10000000000000001\r\n3,false,1.0\r\n"

    def test_serialize_table(self):
        """Test frequency tables are written as counts"""
        table = FrequencyTable(("t",), ("x", "y"), [[1.0, 3.0]])

        assert '"counts": [\n    [1.0, 3.0]\n  ]' in codec.serialize(table)


@pytest.mark.core
@pytest.mark.unit
class TestReaders:
    """Test cases for parsing and reading documents"""

    def test_malformed_json(self):
        """Test the location of a syntax error"""
        with pytest.raises(ValidationError, match="doc.json:1:7: Expecting value"):
            codec.parse('{"a": }', "experiment", "doc.json")

    def test_missing_file(self, tmp_path):
        """Test an absent path"""
        with pytest.raises(ValidationError, match="no such file"):
            codec.read(tmp_path / "absent.json", "experiment")

    def test_unknown_kind(self):
        """Test an unregistered document kind"""
        with pytest.raises(ValidationError, match="Unknown document kind 'graph'"):
            codec.parse("{}", "graph")

    def test_read_experiment(self, merged_files, merged_experiment):
        """Test an experiment file round-trips through as_dict"""
        assert codec.read(merged_files["experiment"], "experiment") == merged_experiment

    def test_errors_are_prefixed_with_the_path(self, write_json):
        """Test validation errors name the file"""
        path = write_json("bad.json", {"parameters": ["t"], "outcomes": ["x", "y"], "rows": [[0.5, 0.6]]})

        with pytest.raises(ValidationError) as excinfo:
            codec.read(path, "experiment")

        assert excinfo.value.messages[0].startswith(f"{path}: ")
        assert "sums to" in excinfo.value.messages[0]

    def test_missing_fields(self):
        """Test the missing keys are named"""
        with pytest.raises(ValidationError, match="missing 'outcomes', 'rows'"):
            codec.parse('{"parameters": ["t"]}', "experiment")

    def test_not_an_object(self):
        """Test a list where an object is expected"""
        with pytest.raises(ValidationError, match="must be a JSON object"):
            codec.parse("[1, 2]", "kernel")

    def test_default_experiment_name(self):
        """Test an unnamed experiment"""
        e = codec.parse('{"parameters": ["t"], "outcomes": ["x"], "rows": [[1.0]]}', "experiment")

        assert e.name == "experiment"

    def test_representation(self):
        """Test maps and kernels are told apart by their keys"""
        t = codec.parse('{"mapping": {"a": "0", "b": "0"}, "to_outcomes": ["0", "1"]}', "representation")
        k = codec.parse('{"from_outcomes": ["a"], "to_outcomes": ["z"], "matrix": [[1.0]]}', "representation")

        assert isinstance(t, DeterministicMap)
        assert t.to_outcomes == ("0", "1")
        assert isinstance(k, Kernel)

    def test_map_needs_object(self):
        """Test a mapping given as a list"""
        with pytest.raises(ValidationError, match="'mapping' must be a JSON object"):
            codec.parse('{"mapping": ["a"]}', "map")

    def test_problem(self):
        """Test default and explicit loss bounds"""
        default = codec.parse('{"actions": ["a", "b"], "loss": [[0, 1]]}', "problem")
        wide = codec.parse('{"actions": ["a"], "loss": [[2]], "bounds": [0, 4]}', "problem")

        assert default.bounds == (0.0, 1.0)
        assert wide.bounds == (0.0, 4.0)

    @pytest.mark.parametrize("bounds", ['[0]', '"wide"', '[0, true]', '[0, "inf"]'])
    def test_problem_bad_bounds(self, bounds):
        """Test malformed loss bounds"""
        with pytest.raises(ValidationError):
            codec.parse(f'{{"actions": ["a"], "loss": [[0]], "bounds": {bounds}}}', "problem")

    def test_rules(self):
        """Test deterministic and randomized rules"""
        deterministic = codec.parse(
            '{"kind": "deterministic", "outcomes": ["x", "y"], "actions": ["a"], "mapping": {"x": "a", "y": "a"}}',
            "rule",
        )
        randomized = codec.parse(
            '{"kind": "randomized", "kernel": {"from_outcomes": ["x"], "to_outcomes": ["a", "b"], "matrix": [[0.5, 0.5]]}}',
            "rule",
        )

        assert deterministic.kind == DETERMINISTIC
        assert deterministic.mapping == {"x": "a", "y": "a"}
        assert randomized.kind == RANDOMIZED

    def test_unknown_rule_kind(self):
        """Test a rule kind that is neither deterministic nor randomized"""
        with pytest.raises(ValidationError, match="Unknown decision rule kind"):
            codec.parse('{"kind": "mixed"}', "rule")

    def test_chain(self, sharp_experiment, noise_kernel):
        """Test a chain document with declared step eps"""
        spec = ChainSpec(sharp_experiment, (noise_kernel,), (noise_kernel,), (0.1,))

        parsed = codec.parse(codec.dumps(spec), "chain")

        assert parsed == spec
        assert parsed.per_step_eps == (0.1,)

    def test_chain_lists(self, sharp_experiment):
        """Test oracles given as an object"""
        document = codec.dumps({"base": sharp_experiment, "ideal": {}, "approx": []})

        with pytest.raises(ValidationError, match="lists of kernels"):
            codec.parse(document, "chain")

    def test_table_from_counts_and_rows(self):
        """Test both table spellings"""
        counts = codec.parse('{"parameters": ["t"], "outcomes": ["x", "y"], "counts": [[1, 3]]}', "table")
        exact = codec.parse('{"parameters": ["t"], "outcomes": ["x", "y"], "rows": [[0.25, 0.75]]}', "table")

        assert counts.to_experiment("c").matrix.tolist() == [[0.25, 0.75]]
        assert exact.to_experiment("e").matrix.tolist() == [[0.25, 0.75]]

    def test_distribution(self):
        """Test a single distribution"""
        p = codec.parse('{"outcomes": ["x", "y"], "probs": [0.5, 0.5]}', "distribution")

        assert p.outcomes == ("x", "y")

    @pytest.mark.parametrize(
        "value, kind",
        [
            (Kernel(("x", "y"), ("a", "b", "c"), [[0.25, 0.75, 0.0], [0.5, 0.0, 0.5]]), "kernel"),
            (DeterministicMap({"y": "b", "x": "a", "z": "b"}, ("a", "b", "c")), "map"),
            (DecisionProblem(("a", "b"), [[0.0, 3.5], [2.0, 0.5]], (0.0, 4.0)), "problem"),
            (DecisionRule.deterministic({"x": "b", "y": "a"}, ("x", "y"), ("a", "b")), "rule"),
            (DecisionRule.randomized(Kernel(("x",), ("a", "b"), [[0.125, 0.875]])), "rule"),
        ],
    )
    def test_written_documents_read_back(self, value, kind):
        """Test each document kind parses back to an equal object"""
        assert codec.parse(codec.dumps(value), kind) == value

    def test_experiment_equality_after_dumps(self):
        """Test the written reals parse back to the same bits"""
        e = Experiment("thirds", ("t",), ("x", "y", "z"), [[0.1, 0.2, 0.7]])

        assert codec.parse(codec.dumps(e), "experiment") == e
