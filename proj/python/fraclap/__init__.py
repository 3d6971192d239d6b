"""Python bindings for the fraclap C++ library."""

import json as _json

from ._fraclap import (
    FraclapError,
    bubble,
    experiments,
    lambda1,
    lambda1_hardy,
    minimize,
    normalize_config,
    q_dirichlet,
    q_navier,
    run_config as _run_config,
    set_threads,
    sobolev_estimate,
    version,
)

__version__ = version()


def run(config, output_dir=""):
    """Run an experiment from a config dict or JSON text; returns the manifest as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_config(text, output_dir))

__all__ = [
    "FraclapError",
    "bubble",
    "experiments",
    "lambda1",
    "lambda1_hardy",
    "minimize",
    "normalize_config",
    "q_dirichlet",
    "q_navier",
    "run",
    "set_threads",
    "sobolev_estimate",
    "version",
]
