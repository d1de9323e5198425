"""HTTP service layer: pydantic schemas, handlers, FastAPI app factory."""

from .app import create_app
from .handlers import ModelRegistry, evidence_from_terms, resolve_network

__all__ = [
    "ModelRegistry",
    "create_app",
    "evidence_from_terms",
    "resolve_network",
]
