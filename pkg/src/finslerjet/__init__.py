"""Finsler geometry by truncated Taylor jets, and checks of the concurrent Kropina change."""
from .config import Config, load_config
from .geometry import ChartPoint, FinslerModel, local_geometry, tensor_bundle
from .jets import Jet
from .kropina import context, fhat_model, predicted
from .verify import run_suite

__all__ = ["ChartPoint", "Config", "FinslerModel", "Jet", "context", "fhat_model",
           "load_config", "local_geometry", "predicted", "run_suite", "tensor_bundle"]
__version__ = "0.1.0"
