"""Alias module: everything lives in circlelab.measures."""
from .measures import *  # noqa: F401,F403
