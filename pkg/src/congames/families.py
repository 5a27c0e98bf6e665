"""Seeded instance generators for the paradox search harness.

Each family maps a counter-keyed random stream to one complete instance (a
game plus the expansion or cost modification the detector needs), so a
(seed, index) pair pins the sample regardless of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .game_core import (
    CostFunction,
    EdgeId,
    GameError,
    GameSpec,
    InfoType,
    Network,
    Population,
    TypeKey,
)
from .paradox import Expansion
from .pathsets import enumerate_paths


@dataclass(frozen=True)
class Sample:
    """One generated instance with the perturbation its detector expects."""

    game: GameSpec
    expansion: Expansion | None = None
    modified_costs: Mapping[EdgeId, CostFunction] | None = None
    modified_demands: Mapping[TypeKey, float] | None = None
    meta: Mapping[str, object] = field(default_factory=dict)


_REGISTRY: dict[str, Callable[[np.random.Generator], Sample]] = {}


def _family(name: str):
    def deco(fn):
        _REGISTRY[name] = fn
        return fn

    return deco


def family_names() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def sample_instance(family: str, seed: int, index: int) -> Sample:
    """Deterministic sample: the stream is keyed by (seed, index)."""
    try:
        gen = _REGISTRY[family]
    except KeyError:
        raise GameError(
            f"unknown family {family!r}; available: {', '.join(family_names())}"
        ) from None
    rng = np.random.default_rng([seed, index])
    return gen(rng)


# ---------------------------------------------------------------------------
# shared builders


def _increasing_polynomial(rng: np.random.Generator, max_degree: int = 3) -> CostFunction:
    """Random nonnegative-coefficient polynomial with a positive linear term."""
    degree = int(rng.integers(1, max_degree + 1))
    coeffs = [float(rng.uniform(0.0, 1.0)), float(rng.uniform(0.05, 1.5))]
    for _ in range(degree - 1):
        coeffs.append(float(rng.uniform(0.0, 0.5)) if rng.random() < 0.6 else 0.0)
    return CostFunction.polynomial(coeffs)


def _ring_network(n_edges: int) -> tuple[Network, list[EdgeId], list[str]]:
    nodes = [f"v{i + 1}" for i in range(n_edges)]
    triples = [
        (f"r{i + 1}", nodes[i], nodes[(i + 1) % n_edges]) for i in range(n_edges)
    ]
    net = Network.from_edges(triples)
    return net, [t[0] for t in triples], nodes


def _ring_arcs(n_edges: int, a: int, b: int) -> tuple[list[EdgeId], list[EdgeId]]:
    """Edge ids of the two arcs between ring positions a and b."""
    forward = []
    i = a
    while i != b:
        forward.append(f"r{i + 1}")
        i = (i + 1) % n_edges
    backward = [f"r{i + 1}" for i in range(n_edges) if f"r{i + 1}" not in forward]
    return forward, backward


def _nonempty_subset(rng: np.random.Generator, items: list[EdgeId], p: float = 0.6) -> frozenset[EdgeId]:
    chosen = [e for e in items if rng.random() < p]
    if not chosen:
        chosen = [items[int(rng.integers(0, len(items)))]]
    return frozenset(chosen)


# ---------------------------------------------------------------------------
# families


@_family("circuit_games")
def _circuit_games(rng: np.random.Generator) -> Sample:
    """Ring networks where every population's relevant network is the ring.

    Population 1 carries a restricted type knowing a single arc plus a
    full-information type; the expansion opens up (part of) the other arc.
    """
    n_edges = int(rng.integers(3, 9))
    net, edge_ids, nodes = _ring_network(n_edges)
    n_pops = int(rng.integers(1, 4))

    pairs: list[tuple[int, int]] = []
    while len(pairs) < n_pops:
        a, b = (int(x) for x in rng.choice(n_edges, size=2, replace=False))
        if all({a, b} != {c, d} for c, d in pairs):
            pairs.append((a, b))

    populations = []
    types = []
    restricted_arc: frozenset[EdgeId] = frozenset()
    unknown_arc: list[EdgeId] = []
    for p, (a, b) in enumerate(pairs, start=1):
        pid = str(p)
        populations.append(
            Population(pid, nodes[a], nodes[b], frozenset(edge_ids))
        )
        fwd, bwd = _ring_arcs(n_edges, a, b)
        if p == 1:
            known, unknown = (fwd, bwd) if rng.random() < 0.5 else (bwd, fwd)
            restricted_arc = frozenset(known)
            unknown_arc = sorted(unknown)
            types.append(InfoType(pid, 1, restricted_arc, float(rng.uniform(0.05, 2.0))))
            types.append(InfoType(pid, 2, frozenset(edge_ids), float(rng.uniform(0.05, 2.0))))
        else:
            types.append(InfoType(pid, 1, frozenset(edge_ids), float(rng.uniform(0.05, 2.0))))
            if rng.random() < 0.4:
                arc = fwd if rng.random() < 0.5 else bwd
                types.append(InfoType(pid, 2, frozenset(arc), float(rng.uniform(0.05, 2.0))))

    costs = {eid: _increasing_polynomial(rng) for eid in edge_ids}
    game = GameSpec(net, tuple(populations), tuple(types), costs)

    if rng.random() < 0.6:
        added = frozenset(unknown_arc)
    else:
        added = _nonempty_subset(rng, unknown_arc)
    return Sample(
        game=game,
        expansion=Expansion(target=("1", 1), added_edges=added),
        meta={"n_edges": n_edges, "n_pops": n_pops},
    )


@_family("sli_chains")
def _sli_chains(rng: np.random.Generator) -> Sample:
    """Single-OD series chains of rings and single edges.

    The restricted type knows one arc of every ring block; the expansion
    opens the other arc of one block.
    """
    n_blocks = int(rng.integers(2, 5))
    kinds = ["ring" if rng.random() < 0.6 else "edge" for _ in range(n_blocks)]
    if "ring" not in kinds:
        kinds[0] = "ring"

    triples: list[tuple[str, str, str]] = []
    known_edges: set[EdgeId] = set()
    hidden_arcs: list[list[EdgeId]] = []
    for b, kind in enumerate(kinds, start=1):
        left, right = f"t{b - 1}", f"t{b}"
        if kind == "edge":
            eid = f"b{b}e1"
            triples.append((eid, left, right))
            known_edges.add(eid)
            continue
        size = int(rng.integers(3, 7))
        upper = int(rng.integers(1, size))
        arcs: list[list[EdgeId]] = [[], []]
        counter = 0
        for arc, length in ((0, upper), (1, size - upper)):
            prev = left
            for j in range(length):
                counter += 1
                eid = f"b{b}e{counter}"
                nxt = right if j == length - 1 else f"b{b}n{counter}"
                triples.append((eid, prev, nxt))
                arcs[arc].append(eid)
                prev = nxt
        keep = int(rng.integers(0, 2))
        known_edges.update(arcs[keep])
        hidden_arcs.append(arcs[1 - keep])

    net = Network.from_edges(triples)
    all_edges = frozenset(t[0] for t in triples)
    origin, destination = "t0", f"t{n_blocks}"
    pop = Population("1", origin, destination, all_edges)
    types = (
        InfoType("1", 1, frozenset(known_edges), float(rng.uniform(0.05, 2.0))),
        InfoType("1", 2, all_edges, float(rng.uniform(0.05, 2.0))),
    )
    costs = {eid: _increasing_polynomial(rng, max_degree=2) for eid in all_edges}
    game = GameSpec(net, (pop,), types, costs)

    arc = hidden_arcs[int(rng.integers(0, len(hidden_arcs)))]
    if rng.random() < 0.7:
        added = frozenset(arc)
    else:
        added = _nonempty_subset(rng, sorted(arc))
    return Sample(
        game=game,
        expansion=Expansion(target=("1", 1), added_edges=added),
        meta={"blocks": tuple(kinds)},
    )


def _wheatstone_network() -> Network:
    return Network.from_edges(
        [
            ("O1", "O", "1"),
            ("1D", "1", "D"),
            ("O2", "O", "2"),
            ("2D", "2", "D"),
            ("12", "1", "2"),
        ]
    )


@_family("wheatstone_info")
def _wheatstone_info(rng: np.random.Generator) -> Sample:
    """Information-restricted Wheatstone games; the expansion reveals the
    crossbar, which is where the informed player can be hurt."""
    net = _wheatstone_network()
    eps = 1e-3
    costs = {
        "O1": CostFunction.polynomial([0.0, float(rng.uniform(0.6, 1.4))]),
        "2D": CostFunction.polynomial([0.0, float(rng.uniform(0.6, 1.4))]),
        "1D": CostFunction.polynomial([float(rng.uniform(0.7, 1.3)), eps]),
        "O2": CostFunction.polynomial([float(rng.uniform(0.7, 1.3)), eps]),
        "12": CostFunction.polynomial([float(rng.uniform(0.0, 0.15)), eps]),
    }
    all_edges = frozenset(costs)
    pop = Population("1", "O", "D", all_edges)
    outer = frozenset({"O1", "1D", "O2", "2D"})
    types = (InfoType("1", 1, outer, float(rng.uniform(0.6, 1.4))),)
    game = GameSpec(net, (pop,), types, costs)
    return Sample(
        game=game,
        expansion=Expansion(target=("1", 1), added_edges=frozenset({"12"})),
    )


def _two_route_assignment(
    network: Network,
    origin: str,
    destination: str,
    rng: np.random.Generator,
) -> Sample:
    """Constructive social-cost witness on any two-terminal network with
    two interior-disjoint routes.

    One route gets load-proportional cost summing to the total flow, the
    other a flat cost of two; the restricted type starts on the flat route,
    and revealing the variable route drags everyone onto it.
    """
    paths = enumerate_paths(network, origin, destination)
    disjoint_pairs = []
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            union = set(paths[i]) | set(paths[j])
            if len(enumerate_paths(network, origin, destination, allowed=union)) == 2:
                disjoint_pairs.append((paths[i], paths[j]))
    if not disjoint_pairs:
        raise GameError("network admits no pair of interior-disjoint routes")
    p_var, p_flat = disjoint_pairs[int(rng.integers(0, len(disjoint_pairs)))]

    eps = 1e-3
    costs: dict[EdgeId, CostFunction] = {}
    var_only = [e for e in p_var if e not in p_flat]
    flat_only = [e for e in p_flat if e not in p_var]
    for eid in network.edge_ids:
        if eid in var_only:
            costs[eid] = CostFunction.polynomial([0.0, 1.0 / len(var_only)])
        elif eid in flat_only:
            costs[eid] = CostFunction.polynomial([2.0 / len(flat_only), eps])
        elif eid in p_var:  # shared by both routes
            costs[eid] = CostFunction.polynomial([0.0, eps])
        else:
            costs[eid] = CostFunction.impassable()

    usable = frozenset(p_var) | frozenset(p_flat)
    populations = (
        Population("1", origin, destination, usable),
        Population("2", origin, destination, usable),
    )
    types = (
        InfoType("1", 1, frozenset(p_flat), float(rng.uniform(0.8, 1.2))),
        InfoType("2", 1, usable, float(rng.uniform(0.8, 1.2))),
    )
    game = GameSpec(network, populations, types, costs)
    return Sample(
        game=game,
        expansion=Expansion(target=("1", 1), added_edges=frozenset(var_only)),
        meta={"variable_route": p_var, "flat_route": p_flat},
    )


@_family("pigou_embedded")
def _pigou_embedded(rng: np.random.Generator) -> Sample:
    """Two-terminal topologies with at least two routes, equipped with the
    constructive social-cost witness."""
    template = int(rng.integers(0, 4))
    if template == 0:
        net = Network.from_edges([("p1", "O", "D"), ("p2", "O", "D")])
    elif template == 1:
        net = Network.from_edges(
            [("d1", "O", "D"), ("m1", "O", "m"), ("m2", "m", "D")]
        )
    elif template == 2:
        net = Network.from_edges(
            [("a1", "O", "a"), ("a2", "a", "D"), ("b1", "O", "b"), ("b2", "b", "D")]
        )
    else:
        net = _wheatstone_network()
    sample = _two_route_assignment(net, "O", "D", rng)
    return Sample(
        game=sample.game,
        expansion=sample.expansion,
        meta={"template": template, **sample.meta},
    )


constructive_ibpsc = _two_route_assignment


# ---------------------------------------------------------------------------
# random games for oracle-agreement checks (not a paradox family)


def random_oracle_game(rng: np.random.Generator) -> GameSpec:
    """Small game with strictly increasing costs and at most 12 total paths.

    Used to compare the descent solver against the exhaustive oracle; the
    strict increase makes equilibrium edge loads unique.
    """
    while True:
        template = int(rng.integers(0, 5))
        if template == 0:
            net = Network.from_edges([("p1", "O", "D"), ("p2", "O", "D")])
            ods = [("O", "D")]
        elif template == 1:
            net = Network.from_edges(
                [("d1", "O", "D"), ("m1", "O", "m"), ("m2", "m", "D")]
            )
            ods = [("O", "D")]
        elif template == 2:
            net, _, nodes = _ring_network(int(rng.integers(4, 7)))
            ods = [(nodes[0], nodes[2]), (nodes[1], nodes[3])]
        elif template == 3:
            net = _wheatstone_network()
            ods = [("O", "D")]
        else:
            net = Network.from_edges(
                [
                    ("g1", "O", "x"),
                    ("g2", "x", "D"),
                    ("g3", "O", "y"),
                    ("g4", "y", "D"),
                    ("g5", "x", "y"),
                ]
            )
            ods = [("O", "D")]

        n_pops = int(rng.integers(1, min(len(ods), 2) + 1))
        populations = []
        types = []
        ok = True
        for p in range(1, n_pops + 1):
            origin, destination = ods[(p - 1) % len(ods)]
            all_paths = enumerate_paths(net, origin, destination)
            if not all_paths:
                ok = False
                break
            relevant = frozenset(e for path in all_paths for e in path)
            populations.append(Population(str(p), origin, destination, relevant))
            n_types = int(rng.integers(1, 3))
            for k in range(1, n_types + 1):
                if k == 1 or rng.random() < 0.5:
                    known = relevant
                else:
                    pick = all_paths[int(rng.integers(0, len(all_paths)))]
                    known = frozenset(pick)
                types.append(
                    InfoType(str(p), k, known, float(rng.uniform(0.05, 2.0)))
                )
        if not ok:
            continue
        costs = {eid: _increasing_polynomial(rng) for eid in net.edge_ids}
        game = GameSpec(net, tuple(populations), tuple(types), costs)

        from .pathsets import build_strategy_sets

        sets = build_strategy_sets(game)
        total = sum(len(s.paths) for s in sets.values())
        if 0 < total <= 12 and all(s.paths for s in sets.values()):
            return game
