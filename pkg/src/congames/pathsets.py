"""Acyclic path enumeration and per-type strategy sets.

Enumeration is exhaustive depth-first search with visited-node marking,
intended for desk-scale networks; a hard cap turns pathological inputs into
a clean error instead of a hang.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .game_core import EdgeId, GameError, GameSpec, Network, NodeId, Path, TypeKey

DEFAULT_PATH_CAP = 10_000


class PathExplosionError(GameError):
    """More simple paths than the configured cap."""

    def __init__(self, cap: int, context: str = "") -> None:
        self.cap = cap
        where = f" while enumerating {context}" if context else ""
        super().__init__(f"path explosion: more than {cap} simple paths{where}")


@dataclass(frozen=True)
class StrategySet:
    """All usable routes of one information type, in lexicographic order."""

    owner: TypeKey
    paths: tuple[Path, ...]

    @property
    def empty(self) -> bool:
        return not self.paths


def iter_simple_paths(
    network: Network,
    origin: NodeId,
    destination: NodeId,
    allowed: Iterable[EdgeId] | None = None,
) -> Iterator[Path]:
    """Yield simple origin-destination paths in lexicographic edge-id order.

    Paths visit no node twice; parallel edges yield distinct paths.  With
    ``allowed`` given, only those edges may be traversed.
    """
    if origin == destination:
        raise GameError("origin and destination must differ")
    if origin not in network.nodes or destination not in network.nodes:
        return
    allow = None if allowed is None else set(allowed)

    prefix: list[EdgeId] = []
    visited = {origin}

    def walk(node: NodeId) -> Iterator[Path]:
        # Completed paths end at the destination; extending one would
        # revisit it, so recursion stops here.
        if node == destination:
            yield tuple(prefix)
            return
        for edge in network.incident(node):
            if allow is not None and edge.id not in allow:
                continue
            nxt = edge.other(node)
            if nxt in visited:
                continue
            visited.add(nxt)
            prefix.append(edge.id)
            yield from walk(nxt)
            prefix.pop()
            visited.remove(nxt)

    yield from walk(origin)


def enumerate_paths(
    network: Network,
    origin: NodeId,
    destination: NodeId,
    allowed: Iterable[EdgeId] | None = None,
    cap: int = DEFAULT_PATH_CAP,
) -> list[Path]:
    """All simple origin-destination paths over the allowed edges.

    Deterministic: the result is ordered lexicographically by edge-id
    sequence.  Raises :class:`PathExplosionError` when the count exceeds
    ``cap``.
    """
    out: list[Path] = []
    for path in iter_simple_paths(network, origin, destination, allowed):
        out.append(path)
        if len(out) > cap:
            raise PathExplosionError(cap, f"{origin}->{destination}")
    return out


def relevant_edges(
    network: Network,
    origin: NodeId,
    destination: NodeId,
    candidate_edges: Iterable[EdgeId] | None = None,
    cap: int = DEFAULT_PATH_CAP,
) -> frozenset[EdgeId]:
    """Subset of the candidates lying on at least one simple O-D path."""
    used: set[EdgeId] = set()
    count = 0
    for path in iter_simple_paths(network, origin, destination, candidate_edges):
        used.update(path)
        count += 1
        if count > cap:
            raise PathExplosionError(cap, f"{origin}->{destination}")
    return frozenset(used)


def build_strategy_sets(
    game: GameSpec, cap: int = DEFAULT_PATH_CAP
) -> dict[TypeKey, StrategySet]:
    """Per-type path enumeration restricted to each type's known edges."""
    sets: dict[TypeKey, StrategySet] = {}
    for t in game.types:
        pop = game.population(t.population)
        paths = enumerate_paths(
            game.network, pop.origin, pop.destination, allowed=t.known_edges, cap=cap
        )
        sets[t.key] = StrategySet(owner=t.key, paths=tuple(paths))
    return sets
