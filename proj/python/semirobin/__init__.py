"""Two nontrivial solutions of semilinear Robin problems with indefinite potential.

Every function takes the INI configuration as text; `load` reads a file and
remembers its directory for nodal data files.
"""

import json
from pathlib import Path

from . import _core
from ._core import ConfigError, Error, normalize_config

__all__ = [
    "ConfigError",
    "Error",
    "Config",
    "load",
    "normalize_config",
    "eigenvalues",
    "check_hypotheses",
    "solve",
    "verify",
    "run_cli",
]


class Config:
    def __init__(self, text, base_dir="."):
        self.text = text
        self.base_dir = str(base_dir)
        self.resolved = json.loads(_core.config_json(text))

    def nodes(self):
        return _core.mesh_nodes(self.text, self.base_dir)


def load(path):
    path = Path(path)
    return Config(path.read_text(), path.parent)


def _as_config(config):
    return config if isinstance(config, Config) else Config(config)


def eigenvalues(config, count=10):
    c = _as_config(config)
    return _core.eigenvalues(c.text, count, c.base_dir)


def check_hypotheses(config):
    c = _as_config(config)
    return json.loads(_core.check_hypotheses(c.text, c.base_dir))


def solve(config):
    """Returns the report dict, with node coordinates and solution arrays added."""
    c = _as_config(config)
    report, solutions, nodes = _core.solve(c.text, c.base_dir)
    report = json.loads(report)
    report["nodes"] = nodes
    report["u"] = solutions
    return report


def verify(config, u, tol_res=0.0):
    c = _as_config(config)
    return json.loads(_core.verify(c.text, u, tol_res, c.base_dir))


def run_cli(*args):
    return _core.run_cli([str(a) for a in args])
