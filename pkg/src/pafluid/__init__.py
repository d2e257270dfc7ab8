"""Fluid limits of sublinear preferential attachment graphs and urns."""

__version__ = "0.1.0"

from .errors import ConfigError, ModelError, NumericError, PaFluidError  # noqa: E402
from .params import ModelParams  # noqa: E402
from .weights import WeightFunction  # noqa: E402

__all__ = ["ConfigError", "ModelError", "NumericError", "PaFluidError", "ModelParams",
           "WeightFunction", "__version__"]
