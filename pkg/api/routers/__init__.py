"""Command routers."""

from . import analysis, curves, twistor
from .base import CommandRouter, Route, collect_routes

ROUTERS = [analysis.router, twistor.router, curves.router]

__all__ = ["analysis", "curves", "twistor", "CommandRouter", "Route", "collect_routes", "ROUTERS"]
