import os

import django

# Set Django settings module BEFORE any Django imports
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "lecam.settings")

# Configure Django
django.setup()


MARKERS = {
    "unit": "mark test as a unit test",
    "integration": "mark test as an integration test",
    "core": "mark test as testing experiments, kernels and total variation",
    "lp": "mark test as testing the deficiency linear program or its oracle",
    "risk": "mark test as testing decision problems and risk transfer",
    "hierarchy": "mark test as testing the approximate-sufficiency hierarchy",
    "gaussian": "mark test as testing the discretized Gaussian experiments",
    "composition": "mark test as testing chain composition or transfer bounds",
    "shannon": "mark test as testing channel coding or reductions",
    "cli": "mark test as exercising a management command or the CLI",
    "models": "mark test as testing models",
    "forms": "mark test as testing forms",
    "slow": "mark test as slow (deselect with '-m \"not slow\"')",
}


def pytest_configure(config):
    """Register custom pytest markers to eliminate warnings"""
    for name, description in MARKERS.items():
        config.addinivalue_line("markers", f"{name}: {description}")
