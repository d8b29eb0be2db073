"""Channel-code experiments for relayless networks with general message access.

Thin wrapper over the compiled ``_crngnet`` module: configs go in as JSON
text or dicts, results come back as plain dicts.
"""

import json as _json

try:  # installed wheel keeps the extension inside the package
    from ._crngnet import (  # type: ignore[no-redef]  # noqa: F401
        conditional_entropy,
        decision_comparison,
        hash_parameters,
        linear_extension,
        run_command,
        validate_config,
    )
except ImportError:  # in-tree builds put it on sys.path
    from _crngnet import (  # noqa: F401
        conditional_entropy,
        decision_comparison,
        hash_parameters,
        linear_extension,
        run_command,
        validate_config,
    )

__all__ = [
    "bounds",
    "conditional_entropy",
    "decision_comparison",
    "hash_parameters",
    "linear_extension",
    "region",
    "simulate",
    "validate",
    "verify",
]


def _as_text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def _run(command, config):
    return _json.loads(run_command(command, _as_text(config)))


def verify(config):
    """Structure, source and hash checks; returns the result record."""
    return _run("verify", config)


def region(config):
    """Rate constraint system, its projection, and tested rate points."""
    return _run("region", config)


def simulate(config):
    """Monte Carlo error estimate of the coding pipeline."""
    return _run("simulate", config)


def bounds(config):
    """Analytic error-bound report for the configured code."""
    return _run("bounds", config)


def validate(config):
    """List of config validation errors; empty when well formed."""
    return validate_config(_as_text(config))
