"""HTTP service wrapping the simulator core."""

from .handlers import create_app

app = create_app()

__all__ = ["app", "create_app"]
