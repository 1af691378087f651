"""Service layer: pydantic request/response schemas and the FastAPI app."""

from .app import app
from . import schemas

__all__ = ["app", "schemas"]
