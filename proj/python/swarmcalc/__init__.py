"""Urn models of collective decisions, their Markov chains and fitting recipes."""

from ._swarmcalc import *  # noqa: F401,F403
from ._swarmcalc import __doc__  # noqa: F401
