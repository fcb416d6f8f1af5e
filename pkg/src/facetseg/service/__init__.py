"""HTTP service: FastAPI app factory plus configuration and state."""

from .app import create_app, create_app_from_config
from .state import AppState, ConfigError, ServiceConfig

__all__ = ["create_app", "create_app_from_config", "AppState", "ServiceConfig", "ConfigError"]
