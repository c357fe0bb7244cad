"""
Option validation for the management commands.

Every command binds its parsed options to one of these forms; file options
are read and decoded during cleaning, so ``cleaned_data`` holds domain
objects rather than paths.
"""

from django import forms

from deficiency import codec
from deficiency.exceptions import DimensionError
from deficiency.gaussian import COVERAGE_SIGMAS, Grid, sweep_values
from deficiency.hierarchy import DEFAULT_EPS


class DocumentField(forms.CharField):
    """Path to a JSON document, cleaned into the object it describes."""

    def __init__(self, kind: str, **kwargs):
        self.kind = kind
        super().__init__(**kwargs)

    def clean(self, value):
        path = super().clean(value)
        if not path:
            return None
        try:
            return codec.read(path, self.kind)
        except DimensionError as e:
            raise forms.ValidationError(f"{path}: {e}")


class FloatListField(forms.CharField):
    """Comma-separated reals, e.g. ``-1,0,1``."""

    def clean(self, value):
        text = super().clean(value)
        if not text:
            return []
        try:
            return [float(part) for part in text.split(",")]
        except ValueError:
            raise forms.ValidationError(f"Expected comma-separated numbers, got {text!r}")


class IntListField(forms.CharField):
    def clean(self, value):
        text = super().clean(value)
        if not text:
            return []
        try:
            return [int(part) for part in text.split(",")]
        except ValueError:
            raise forms.ValidationError(f"Expected comma-separated integers, got {text!r}")


class GridField(forms.CharField):
    def clean(self, value):
        text = super().clean(value)
        return Grid.parse(text) if text else None


class RunForm(forms.Form):
    record = forms.BooleanField(required=False)


class DeficiencyForm(RunForm):
    source = DocumentField("experiment")
    target = DocumentField("experiment")
    both = forms.BooleanField(required=False)
    oracle = forms.FloatField(required=False, min_value=0.0, max_value=1.0)
    kernel = DocumentField("representation", required=False)

    def clean_oracle(self):
        resolution = self.cleaned_data.get("oracle")
        if resolution is not None and resolution <= 0:
            raise forms.ValidationError("Oracle resolution must be positive")
        return resolution

    def clean(self):
        cleaned_data = super().clean()
        source, target = cleaned_data.get("source"), cleaned_data.get("target")
        if source is not None and target is not None and source.parameters != target.parameters:
            raise forms.ValidationError(
                "Source and target experiments must list the same parameters"
            )
        return cleaned_data


class HierarchyForm(RunForm):
    experiment = DocumentField("experiment")
    map = DocumentField("map")
    eps = forms.FloatField(required=False, min_value=0.0)

    def clean_eps(self):
        eps = self.cleaned_data.get("eps")
        return DEFAULT_EPS if eps is None else eps


class CertifyForm(RunForm):
    CLASS_CHOICES = [("exhaustive", "exhaustive deterministic rules")]

    source = DocumentField("table")
    target = DocumentField("table")
    decision_class = forms.ChoiceField(choices=CLASS_CHOICES, required=False)
    problem = DocumentField("problem", required=False)
    epsilon = forms.FloatField(required=False, min_value=0.0)
    samples = forms.IntegerField(required=False, min_value=1)
    seed = forms.IntegerField(required=False, min_value=0)

    def clean_decision_class(self):
        return self.cleaned_data.get("decision_class") or "exhaustive"


class CollapseForm(RunForm):
    sigma = forms.FloatField()
    c_grid = forms.CharField(required=False)
    grid = GridField(required=False)
    thetas = FloatListField(required=False)

    def clean_sigma(self):
        sigma = self.cleaned_data["sigma"]
        if not sigma > 1:
            raise forms.ValidationError("sigma must be greater than 1")
        return sigma

    def clean_c_grid(self):
        text = self.cleaned_data.get("c_grid") or "-1:1:0.05"
        grid = Grid.parse(text)
        return sweep_values(grid.lo, grid.hi, grid.step)

    def clean_grid(self):
        return self.cleaned_data.get("grid") or Grid(-6.0, 6.0, 0.5)

    def clean_thetas(self):
        return self.cleaned_data.get("thetas") or [-1.0, 0.0, 1.0]


class FloorBinningForm(RunForm):
    grid = GridField(required=False)
    thetas = FloatListField(required=False)

    def clean_grid(self):
        return self.cleaned_data.get("grid") or Grid(-4.0, 5.0, 0.25)

    def clean_thetas(self):
        return self.cleaned_data.get("thetas") or [0.0, 0.5]


class NoiseSimulationForm(RunForm):
    step = forms.FloatField(required=False, min_value=1e-4)
    thetas = FloatListField(required=False)

    def clean_step(self):
        return self.cleaned_data.get("step") or 0.01

    def clean_thetas(self):
        thetas = self.cleaned_data.get("thetas") or [0.0, 0.1]
        if len(thetas) < 2:
            raise forms.ValidationError("At least two means are needed")
        return thetas

    def clean(self):
        cleaned_data = super().clean()
        thetas, step = cleaned_data.get("thetas"), cleaned_data.get("step")
        if thetas and step:
            # covers every mean plus the margin required for the unit-variance family
            cleaned_data["grid"] = Grid(
                min(thetas) - COVERAGE_SIGMAS, max(thetas) + COVERAGE_SIGMAS, step
            )
        return cleaned_data


class ComposeForm(RunForm):
    chain = DocumentField("chain")


class NftForm(RunForm):
    source = DocumentField("experiment")
    target = DocumentField("experiment")
    map = DocumentField("representation")
    target_map = DocumentField("representation", required=False)


class ShannonForm(RunForm):
    p = forms.FloatField(min_value=0.0, max_value=0.5)
    repetition = IntListField(required=False)

    def clean_repetition(self):
        values = self.cleaned_data.get("repetition") or [1, 3, 5, 7]
        if any(n < 1 or n % 2 == 0 for n in values):
            raise forms.ValidationError("Repetition blocklengths must be odd positive integers")
        return values


class VerifyPaperForm(RunForm):
    seed = forms.IntegerField(required=False, min_value=0)
