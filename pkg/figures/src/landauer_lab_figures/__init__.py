"""Figure rendering for landauer-lab CSV outputs; no physics computed here."""

__version__ = "0.1.0"

from .io import EmptyDataError, SchemaError

__all__ = ["EmptyDataError", "SchemaError", "__version__"]
