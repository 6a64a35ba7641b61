"""Petri-net models, reachability analysis and protocol simulation for the
QURD decentralized resource-reservation scheme."""

from .tpn import Net, TimedState, NotFireable, UrgencyViolation

__all__ = [
    "Net",
    "TimedState",
    "NotFireable",
    "UrgencyViolation",
]

__version__ = "0.1.0"
