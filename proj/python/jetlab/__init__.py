"""Python front end for the jetlab experiment harness."""

import json

from ._core import JetlabError, config_hash as _config_hash, modes, multi_indices, power_sum
from ._core import run as _run, schema as _schema, taylor as _taylor, validate as _validate, version

__all__ = ["JetlabError", "config_hash", "modes", "multi_indices", "power_sum", "run", "schema", "taylor",
           "validate", "version"]


def schema():
    return json.loads(_schema())


def validate(config):
    _validate(json.dumps(config))


def config_hash(config):
    return _config_hash(json.dumps(config))


def run(config, out_dir=None, grid_scale=None, exact=False):
    """Run one experiment and return its manifest as a dict."""
    return json.loads(_run(json.dumps(config), out_dir, grid_scale, exact))


def taylor(expr, x, order):
    if not isinstance(expr, str):
        expr = json.dumps(expr)
    return _taylor(expr, list(x), order)
