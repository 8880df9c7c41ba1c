"""Replicated data types with an executable reference semantics."""

from crdtkit.causality import Dot, DotContext, HybridTimestamp, VersionVector
from crdtkit.extensions import BoundedCounter, TopKSet
from crdtkit.state_crdts import AWSet, GCounter, LWWRegister, LWWSet, MVRegister, PNCounter, RWSet

__version__ = "0.1.0"

__all__ = [
    "AWSet", "BoundedCounter", "Dot", "DotContext", "GCounter", "HybridTimestamp", "LWWRegister",
    "LWWSet", "MVRegister", "PNCounter", "RWSet", "TopKSet", "VersionVector",
]
