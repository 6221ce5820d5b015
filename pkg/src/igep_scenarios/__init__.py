"""igep-scenarios - Scenario generation from point-forecast ensembles."""

__version__ = "0.1.0"

from .main import main

__all__ = ["main", "__version__"]
