"""
Pytest configuration and common fixtures for the deficiency toolkit tests
"""

import json

import numpy as np
import pytest


@pytest.fixture
def merged_experiment():
    """Three-outcome pair whose first two outcomes get merged"""
    from deficiency.suite import MERGED_P

    return MERGED_P


@pytest.fixture
def merged_map():
    """Map sending a and b to 0 and c to 1"""
    from deficiency.suite import MERGED_MAP

    return MERGED_MAP


@pytest.fixture
def merged_image(merged_experiment, merged_map):
    """The merged experiment pushed through the merging map"""
    from deficiency.core import apply_kernel

    return apply_kernel(merged_experiment, merged_map, name="Q")


@pytest.fixture
def sharp_experiment():
    """Two-parameter experiment with well separated rows"""
    from deficiency.core import Experiment

    return Experiment("sharp", ("t0", "t1"), ("x0", "x1"), [[0.9, 0.1], [0.2, 0.8]])


@pytest.fixture
def noise_kernel():
    """Symmetric flip of the two outcomes with probability 0.25"""
    from deficiency.core import Kernel

    return Kernel(("x0", "x1"), ("x0", "x1"), [[0.75, 0.25], [0.25, 0.75]])


@pytest.fixture
def garbled_experiment(sharp_experiment, noise_kernel):
    """The sharp experiment seen through the noise kernel"""
    from deficiency.core import apply_kernel

    return apply_kernel(sharp_experiment, noise_kernel, name="garbled")


@pytest.fixture
def rng():
    """Seeded generator so randomized tests are reproducible"""
    return np.random.default_rng(20240611)


@pytest.fixture
def write_json(tmp_path):
    """Write a JSON document into the test directory and return its path"""

    def write(name, document):
        path = tmp_path / name
        text = document if isinstance(document, str) else json.dumps(document)
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def merged_files(write_json, merged_experiment, merged_image, merged_map):
    """Experiment, image and map of the merged pair as JSON files"""
    return {
        "experiment": write_json("merged.json", merged_experiment.as_dict()),
        "image": write_json("image.json", merged_image.as_dict()),
        "map": write_json("map.json", merged_map.as_dict()),
    }


@pytest.fixture
def small_suite(settings):
    """Keep the randomized anchors short"""
    settings.LECAM_SUITE_TRIALS = {"oracle": 1, "composition": 3, "nft": 3}
    return settings
