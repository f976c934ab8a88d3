"""Decay and decoherence of unstable particles as completely positive semigroups."""

__version__ = "0.1.0"

from .bounds import lambda_max, t_plus
from .meson import CpViolation, MesonParams
from .presets import get_preset
from .scalar import ScalarParams

__all__ = ["CpViolation", "MesonParams", "ScalarParams", "get_preset", "lambda_max", "t_plus", "__version__"]
