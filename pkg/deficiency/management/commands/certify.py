"""
Empirical deficiency-gap certificate between source and target samples.
"""

import numpy as np
from django.conf import settings

from deficiency.forms import CertifyForm
from deficiency.risk import (
    exhaustive_decision_class,
    empirical_deficiency_gap,
    sample_frequency_table,
    zero_one_problem,
)

from ._base import LecamCommand, Outcome


class Command(LecamCommand):
    help = "Largest risk gap over a finite decision class on held-out frequency tables"
    form_class = CertifyForm
    input_options = ("source", "target", "problem")

    def add_arguments(self, parser):
        parser.add_argument(
            "--source", required=True, help="Frequency table or experiment JSON file"
        )
        parser.add_argument(
            "--target", required=True, help="Frequency table or experiment JSON file"
        )
        parser.add_argument(
            "--class",
            dest="decision_class",
            default="exhaustive",
            help="Decision class (only 'exhaustive' is built in)",
        )
        parser.add_argument(
            "--problem",
            help="Decision problem JSON file (default: 0-1 loss on the parameters)",
        )
        parser.add_argument(
            "--epsilon", type=float, help="Threshold for declaring the target eps-simulable"
        )
        parser.add_argument(
            "--samples",
            type=int,
            help="Draw this many samples per parameter from each table before certifying",
        )
        parser.add_argument("--seed", type=int, help="Seed for --samples")
        super().add_arguments(parser)

    def compute(self, cleaned_data):
        source, target = cleaned_data["source"], cleaned_data["target"]
        seed = None
        if cleaned_data["samples"]:
            seed = cleaned_data["seed"]
            if seed is None:
                seed = settings.LECAM_DEFAULT_SEED
            rng = np.random.default_rng(seed)
            source = sample_frequency_table(source.to_experiment("source"), cleaned_data["samples"], rng)
            target = sample_frequency_table(target.to_experiment("target"), cleaned_data["samples"], rng)

        problem = cleaned_data["problem"] or zero_one_problem(source.parameters)
        members = exhaustive_decision_class(source.outcomes, target.outcomes, [problem])
        report = empirical_deficiency_gap(source, target, members, cleaned_data["epsilon"])
        payload = report.as_dict()
        payload["seed"] = seed
        verdict = {True: "simulable", False: "not simulable", None: "no threshold"}[report.simulable]
        return Outcome(
            payload,
            summary=f"delta_hat = {report.delta_hat:.6g} over {report.decision_class_size} class members ({verdict})",
            seed=seed,
        )
