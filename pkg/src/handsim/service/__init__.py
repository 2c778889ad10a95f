"""Session-oriented HTTP service wrapping the simulator."""

from .app import app, create_app

__all__ = ["app", "create_app"]
