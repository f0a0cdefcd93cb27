from .base import SurfaceModel, TangentMap
from .loader import load_model, model_from_dict
from .torus import TorusModel, real_form
from .wehler import WEHLER_GRAM, WehlerModel, golden_coefficients, involution_pullback

__all__ = [
    "SurfaceModel", "TangentMap", "TorusModel", "WehlerModel", "WEHLER_GRAM",
    "golden_coefficients", "involution_pullback", "load_model", "model_from_dict",
    "real_form",
]
