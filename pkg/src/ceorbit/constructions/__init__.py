"""Priority constructions run on :mod:`ceorbit.priority_engine`."""

from __future__ import annotations

from ..perm_group import PermGroup
from ..priority_engine import ConstructionRun, Engine
from .antichain import AntichainSpec
from .inf_orbit import InfOrbitSpec, RestrainedPairSet
from .least_reduction import LeastReductionSpec
from .nonisolated import (ConsistencySearchFailed, NonIsolatedSpec, QuadrupleSet,
                          consistent_map_search)
from .sigma3 import Sigma3Spec

__all__ = [
    "AntichainSpec", "ConsistencySearchFailed", "InfOrbitSpec", "LeastReductionSpec",
    "NonIsolatedSpec", "QuadrupleSet", "RestrainedPairSet", "Sigma3Spec",
    "antichain_spec", "consistent_map_search", "least_reduction_spec", "restrained_pairs",
    "sigma3_infinite_orbit_spec", "sigma3_nonisolated_spec",
]


def least_reduction_spec(reg, universe, opponents, injections=None) -> LeastReductionSpec:
    return LeastReductionSpec(reg, universe, opponents, injections)


def sigma3_infinite_orbit_spec(reg, X: Sigma3Spec, G: PermGroup, opponents,
                               **kw) -> InfOrbitSpec:
    return InfOrbitSpec(reg, X, G, opponents, **kw)


def sigma3_nonisolated_spec(reg, X: Sigma3Spec, G: PermGroup, opponents,
                            **kw) -> NonIsolatedSpec:
    return NonIsolatedSpec(reg, X, G, opponents, **kw)


def antichain_spec(reg, levels: int, opponents, injections=None) -> AntichainSpec:
    return AntichainSpec(reg, levels, opponents, injections)


def restrained_pairs(state, node) -> RestrainedPairSet:
    """Restrained pairs of ``node`` (a strategy or its address) in ``state``,
    an :class:`Engine` or a finished :class:`ConstructionRun` of an
    infinite-orbit construction."""
    eng = state.engine if isinstance(state, ConstructionRun) else state
    if not isinstance(eng, Engine) or not isinstance(eng.spec, InfOrbitSpec):
        raise TypeError("restrained pairs are defined for infinite-orbit runs")
    if isinstance(node, str):
        node = eng.ever[node]
    if node.path not in eng.live:
        raise ValueError(f"node {node.addr} is not active")
    return eng.spec.restrained_pairs(eng, node)
