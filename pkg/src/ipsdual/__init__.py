"""Dualities of two-type particle systems built from basic mechanisms."""
from .diffusion import BracoParams, FellerParams, SdeRun
from .graphical import EventLog, RateSpec
from .mechanisms import BasicMechanism, PairState, canonical, classify_all, is_dual

__all__ = [
    "BasicMechanism",
    "BracoParams",
    "EventLog",
    "FellerParams",
    "PairState",
    "RateSpec",
    "SdeRun",
    "canonical",
    "classify_all",
    "is_dual",
]

__version__ = "0.1.0"
