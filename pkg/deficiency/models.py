from django.core.exceptions import ValidationError
from django.db import models


class RunManifest(models.Model):
    # What was run
    subcommand = models.CharField(max_length=32)
    inputs = models.JSONField(default=list, blank=True)
    options = models.JSONField(default=dict, blank=True)
    seed = models.PositiveBigIntegerField(null=True, blank=True)
    version = models.CharField(max_length=32)

    # What came out
    outputs = models.JSONField(default=list, blank=True)
    exit_code = models.PositiveSmallIntegerField(default=0)
    stdout_sha256 = models.CharField(max_length=64, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    def clean(self):
        if self.stdout_sha256 and len(self.stdout_sha256) != 64:
            raise ValidationError("stdout_sha256 must be a 64-character hex digest")
        if not isinstance(self.inputs, list) or not isinstance(self.outputs, list):
            raise ValidationError("Inputs and outputs must be lists of paths")

    def save(self, *args, **kwargs):
        self.clean()
        super().save(*args, **kwargs)

    def reproduces(self, other: "RunManifest") -> bool:
        """Same command, inputs and seed gave the same stdout."""
        return (
            self.subcommand == other.subcommand
            and self.inputs == other.inputs
            and self.options == other.options
            and self.seed == other.seed
            and self.stdout_sha256 == other.stdout_sha256
        )

    def __str__(self):
        return f"{self.subcommand} (seed {self.seed}) -> exit {self.exit_code}"

    class Meta:
        ordering = ["-created_at"]
