"""LEABRA learning with AdEx-style rate-coded unit dynamics."""
from leabra7.layer import Layer
from leabra7.network import Logs, Net, NetworkError, NetworkFileError, load
from leabra7.projection import Projection, contrast_enhance, xcal
from leabra7.specs import (Constant, Gaussian, LayerSpec, ProjnSpec,
                           SpecError, UnitSpec, Uniform, validate_spec)
from leabra7.unit import Nxx1, UnitState, nxx1

__version__ = "0.1.0"

__all__ = [
    "Constant", "Gaussian", "Layer", "LayerSpec", "Logs", "Net",
    "NetworkError", "NetworkFileError", "Nxx1", "Projection", "ProjnSpec",
    "SpecError", "UnitSpec", "UnitState", "Uniform", "contrast_enhance",
    "load", "nxx1", "validate_spec", "xcal"
]
