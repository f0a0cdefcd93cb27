"""Model definition files.

A model file is JSON or YAML with a ``type`` key.

Torus::

    type: torus
    generators:                # complex 2x2 matrices
      A: [[2, 1], [1, 1]]      # real entries may be written directly
      C: {re: [[1, 0], [0, 0]], im: [[0, 1], [1, 0]]}
    translations: {A: [0.1, 0, 0, 0]}   # optional, lattice coordinates
    lattice: [[...4x4...]]              # optional, defaults to Z^4

Wehler::

    type: wehler
    coefficients: golden       # or a 3x3x3 nested list c[i][j][k] of x^i y^j z^k
    generators: [s1s2, s2s3]   # optional, defaults to [s1, s2, s3]
    escape_radius: 1000        # optional
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import yaml

from ..errors import ConfigError
from .torus import TorusModel
from .wehler import WehlerModel, golden_coefficients


def _complex_matrix(spec):
    if isinstance(spec, dict):
        if "re" not in spec:
            raise ConfigError("complex matrix needs an 're' part")
        re_part = np.asarray(spec["re"], dtype=float)
        im_part = np.asarray(spec.get("im", np.zeros_like(re_part)), dtype=float)
        return re_part + 1j * im_part
    return np.asarray(spec, dtype=complex)


def read_structured(path) -> dict:
    text = Path(path).read_text()
    if str(path).endswith((".yaml", ".yml")):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def model_from_dict(spec: dict):
    kind = spec.get("type")
    try:
        if kind == "torus":
            gens = {str(k): _complex_matrix(v) for k, v in spec["generators"].items()}
            return TorusModel(gens, lattice=spec.get("lattice"),
                              translations=spec.get("translations"))
        if kind == "wehler":
            coeffs = spec.get("coefficients", "golden")
            coeffs = golden_coefficients() if coeffs == "golden" else coeffs
            return WehlerModel(coeffs, generators=spec.get("generators"),
                               escape_radius=spec.get("escape_radius", 1e3),
                               newton_steps=spec.get("newton_steps", 1))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} model definition: {exc}") from None
    raise ConfigError(f"unknown model type {kind!r}")


def load_model(source):
    """Build a model from a dict or from a JSON/YAML file path."""
    if isinstance(source, dict):
        return model_from_dict(source)
    return model_from_dict(read_structured(source))
