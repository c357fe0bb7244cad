"""
Django settings for the lecam project.

All configuration for the deficiency toolkit lives here. Every value can be
overridden through the environment, so a run is fully described by its
command line plus the variables below.
"""

import os
from pathlib import Path

from lecam import __version__

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals; nothing here is served over HTTP.
SECRET_KEY = os.environ.get("SECRET_KEY", "django-insecure-lecam-desk-scale-toolkit")

DEBUG = os.environ.get("DEBUG", "0") == "1"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "deficiency",
]


# Database
# Run manifests are stored in a local SQLite file (see `--record`).

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": os.environ.get("LECAM_DB_PATH", BASE_DIR / "lecam.sqlite3"),
    }
}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

TIME_ZONE = "UTC"

USE_TZ = True


# Deficiency toolkit

LECAM_VERSION = __version__

# Worker cap for pairwise LP solves and Monte Carlo trials.
LECAM_THREADS = int(os.environ.get("LECAM_THREADS", "0")) or (os.cpu_count() or 1)

LECAM_DEFAULT_SEED = int(os.environ.get("LECAM_SEED", "42"))

# Upper limit on kernel evaluations performed by the brute-force grid oracle.
LECAM_ORACLE_MAX_EVALUATIONS = int(
    os.environ.get("LECAM_ORACLE_MAX_EVALUATIONS", str(2 * 10**8))
)

# Largest |actions|^|outcomes| accepted by rule enumeration.
LECAM_RULE_ENUMERATION_LIMIT = 10**6

# Trial counts used by `verify-paper` for its randomized anchors.
LECAM_SUITE_TRIALS = {
    "oracle": int(os.environ.get("LECAM_ORACLE_TRIALS", "100")),
    "composition": int(os.environ.get("LECAM_COMPOSITION_TRIALS", "200")),
    "nft": int(os.environ.get("LECAM_NFT_TRIALS", "500")),
}

LECAM_LOG_LEVEL = os.environ.get("LECAM_LOG_LEVEL", "INFO").upper()


# Logging configuration
# stdout is reserved for machine-readable output; everything else goes to stderr.
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "{levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        "django": {
            "handlers": ["console"],
            "level": "INFO",
            "propagate": False,
        },
        "deficiency": {
            "handlers": ["console"],
            "level": LECAM_LOG_LEVEL,
            "propagate": False,
        },
    },
}

if os.environ.get("LECAM_LOG_FILE"):
    LOGGING["handlers"]["file"] = {
        "class": "logging.FileHandler",
        "filename": os.environ["LECAM_LOG_FILE"],
        "formatter": "plain",
    }
    for _logger in LOGGING["loggers"].values():
        _logger["handlers"].append("file")
