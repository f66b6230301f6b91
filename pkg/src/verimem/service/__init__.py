"""HTTP service layer: FastAPI app plus request/response schemas."""

from .app import create_app
from .state import EngineState

__all__ = ["EngineState", "create_app"]
