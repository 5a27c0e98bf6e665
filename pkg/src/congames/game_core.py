"""Core model for nonatomic congestion games with heterogeneous information.

A game couples an undirected multigraph with per-edge congestion costs, a set
of origin-destination populations, and per-population information types that
restrict which edges a player may route over.  All values are immutable after
construction and every operation is a pure function, so instances can be
shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

NodeId = str
EdgeId = str
TypeKey = tuple[str, int]
Path = tuple[EdgeId, ...]
LoadVector = dict[EdgeId, float]

DEFAULT_BIG_M = 1e9

# Flows at or below this (scaled by demand) count as unused.
FLOW_EPS = 1e-12

# Per-type flow conservation is enforced to this absolute tolerance.
FEASIBILITY_TOL = 1e-9


class GameError(Exception):
    """Raised for structural or domain errors in game definitions."""


@dataclass(frozen=True)
class Edge:
    """Undirected edge with a stable id; parallel edges carry distinct ids."""

    id: EdgeId
    a: NodeId
    b: NodeId

    def endpoints(self) -> frozenset[NodeId]:
        return frozenset((self.a, self.b))

    def other(self, node: NodeId) -> NodeId:
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise GameError(f"node {node!r} is not an endpoint of edge {self.id!r}")


@dataclass(frozen=True)
class Network:
    """Undirected multigraph with identified edges.

    Parallel edges are permitted (they carry distinct ids); self-loops are
    not.  Global connectivity is not required: populations may inhabit
    disjoint parts of the graph.
    """

    nodes: frozenset[NodeId]
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(
            self, "edges", tuple(sorted(self.edges, key=lambda e: e.id))
        )
        seen: set[EdgeId] = set()
        for e in self.edges:
            if e.id in seen:
                raise GameError(f"duplicate edge id {e.id!r}")
            seen.add(e.id)
            if e.a == e.b:
                raise GameError(f"edge {e.id!r} is a self-loop")
            missing = {e.a, e.b} - self.nodes
            if missing:
                raise GameError(
                    f"edge {e.id!r} references undeclared nodes {sorted(missing)}"
                )

    @classmethod
    def from_edges(
        cls,
        triples: Iterable[tuple[str, str, str]],
        extra_nodes: Iterable[str] = (),
    ) -> "Network":
        """Build a network from (edge-id, endpoint, endpoint) triples."""
        edges = tuple(Edge(str(i), str(a), str(b)) for i, a, b in triples)
        nodes = {n for e in edges for n in (e.a, e.b)} | {str(n) for n in extra_nodes}
        return cls(frozenset(nodes), edges)

    @cached_property
    def _by_id(self) -> dict[EdgeId, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def _incident(self) -> dict[NodeId, tuple[Edge, ...]]:
        inc: dict[NodeId, list[Edge]] = {n: [] for n in self.nodes}
        for e in self.edges:
            inc[e.a].append(e)
            inc[e.b].append(e)
        return {n: tuple(sorted(es, key=lambda e: e.id)) for n, es in inc.items()}

    @property
    def edge_ids(self) -> tuple[EdgeId, ...]:
        return tuple(e.id for e in self.edges)

    def has_edge(self, edge_id: EdgeId) -> bool:
        return edge_id in self._by_id

    def edge(self, edge_id: EdgeId) -> Edge:
        try:
            return self._by_id[edge_id]
        except KeyError:
            raise GameError(f"unknown edge id {edge_id!r}") from None

    def incident(self, node: NodeId) -> tuple[Edge, ...]:
        """Edges touching ``node``, in ascending edge-id order."""
        return self._incident.get(node, ())

    def degree(self, node: NodeId) -> int:
        return len(self.incident(node))

    def subnetwork(
        self, edge_ids: Iterable[EdgeId], keep_nodes: Iterable[NodeId] = ()
    ) -> "Network":
        """Restriction to the given edges plus their endpoints."""
        wanted = set(edge_ids)
        edges = tuple(e for e in self.edges if e.id in wanted)
        missing = wanted - {e.id for e in edges}
        if missing:
            raise GameError(f"unknown edge ids {sorted(missing)}")
        nodes = {n for e in edges for n in (e.a, e.b)} | set(keep_nodes)
        return Network(frozenset(nodes), edges)


@dataclass(frozen=True)
class CostFunction:
    """Per-edge congestion cost.

    Either a polynomial in the edge load with nonnegative coefficients
    (constant term first) -- continuous, nondecreasing and nonnegative by
    construction -- or a big-M sentinel: a finite stand-in for an impassable
    edge that returns a fixed large constant at every load.
    """

    coeffs: tuple[float, ...] | None = None
    big_m: float | None = None

    def __post_init__(self) -> None:
        if (self.coeffs is None) == (self.big_m is None):
            raise GameError("cost must be either polynomial or big-M, not both")
        if self.coeffs is not None:
            cs = tuple(float(c) for c in self.coeffs)
            object.__setattr__(self, "coeffs", cs)
            for j, c in enumerate(cs):
                if not (c >= 0.0) or c != c or c == float("inf"):
                    raise GameError(f"coefficient {j} must be finite and >= 0, got {c}")
        else:
            m = float(self.big_m)
            object.__setattr__(self, "big_m", m)
            if not (m > 0.0) or m == float("inf"):
                raise GameError(f"big-M value must be finite and positive, got {m}")

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "CostFunction":
        return cls(coeffs=tuple(coeffs))

    @classmethod
    def constant(cls, value: float) -> "CostFunction":
        return cls(coeffs=(float(value),))

    @classmethod
    def impassable(cls, big_m: float = DEFAULT_BIG_M) -> "CostFunction":
        return cls(big_m=big_m)

    @property
    def kind(self) -> str:
        return "big_m" if self.big_m is not None else "polynomial"

    @property
    def is_big_m(self) -> bool:
        return self.big_m is not None

    @property
    def strictly_increasing(self) -> bool:
        """True when the cost strictly increases with load on load >= 0."""
        if self.big_m is not None:
            return False
        return any(c > 0.0 for c in self.coeffs[1:])

    def __call__(self, load: float) -> float:
        return eval_cost(self, load)


def eval_cost(fn: CostFunction, load: float) -> float:
    """Evaluate a cost function at a nonnegative load."""
    if load < 0:
        raise GameError(f"load must be nonnegative, got {load}")
    if fn.big_m is not None:
        return fn.big_m
    acc = 0.0
    for c in reversed(fn.coeffs):
        acc = acc * load + c
    return acc


def cost_integral(fn: CostFunction, load: float) -> float:
    """Antiderivative of the cost, zero at zero load (closed form)."""
    if load < 0:
        raise GameError(f"load must be nonnegative, got {load}")
    if fn.big_m is not None:
        return fn.big_m * load
    acc = 0.0
    # integral of sum c_j t^j is sum c_j t^(j+1)/(j+1)
    for j in range(len(fn.coeffs) - 1, -1, -1):
        acc = acc * load + fn.coeffs[j] / (j + 1)
    return acc * load


@dataclass(frozen=True)
class Population:
    """A group of players sharing an origin-destination pair.

    ``relevant_edges`` is the population's full resource set; information
    types below restrict it further.
    """

    id: str
    origin: NodeId
    destination: NodeId
    relevant_edges: frozenset[EdgeId]

    def __post_init__(self) -> None:
        object.__setattr__(self, "relevant_edges", frozenset(self.relevant_edges))


@dataclass(frozen=True)
class InfoType:
    """A sub-group of a population knowing only ``known_edges``."""

    population: str
    index: int
    known_edges: frozenset[EdgeId]
    demand: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "known_edges", frozenset(self.known_edges))
        object.__setattr__(self, "demand", float(self.demand))

    @property
    def key(self) -> TypeKey:
        return (self.population, self.index)


@dataclass(frozen=True)
class GameSpec:
    """The full game: network, costs, populations and information types.

    Construction is deliberately lenient about cross-references (unknown
    edges, negative demands, ...) so that :func:`validate_game` can report
    such problems instead of refusing to represent them.
    """

    network: Network
    populations: tuple[Population, ...]
    types: tuple[InfoType, ...]
    costs: Mapping[EdgeId, CostFunction]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "populations", tuple(sorted(self.populations, key=lambda p: p.id))
        )
        object.__setattr__(
            self, "types", tuple(sorted(self.types, key=lambda t: t.key))
        )
        object.__setattr__(
            self, "costs", dict(sorted(self.costs.items()))
        )

    @cached_property
    def _pop_by_id(self) -> dict[str, Population]:
        return {p.id: p for p in self.populations}

    @cached_property
    def _type_by_key(self) -> dict[TypeKey, InfoType]:
        return {t.key: t for t in self.types}

    def population(self, pop_id: str) -> Population:
        try:
            return self._pop_by_id[pop_id]
        except KeyError:
            raise GameError(f"unknown population {pop_id!r}") from None

    def info_type(self, key: TypeKey) -> InfoType:
        try:
            return self._type_by_key[key]
        except KeyError:
            raise GameError(f"unknown information type {key!r}") from None

    @property
    def type_keys(self) -> tuple[TypeKey, ...]:
        return tuple(t.key for t in self.types)

    @cached_property
    def irredundant_edges(self) -> frozenset[EdgeId]:
        """Union of all populations' relevant edge sets."""
        out: set[EdgeId] = set()
        for p in self.populations:
            out |= p.relevant_edges
        return frozenset(out)

    def cost(self, edge_id: EdgeId) -> CostFunction:
        try:
            return self.costs[edge_id]
        except KeyError:
            raise GameError(f"no cost function for edge {edge_id!r}") from None


@dataclass(frozen=True)
class Outcome:
    """Per-(population, type) distribution of demand over strategies.

    Strategies are ordered edge-id paths; flows are nonnegative.  Strategy
    ownership is structural: flows are keyed by the owning type, so path
    sets of distinct populations never collide even when equal as edge
    sequences.
    """

    flows: Mapping[TypeKey, Mapping[Path, float]]

    def __post_init__(self) -> None:
        norm: dict[TypeKey, dict[Path, float]] = {}
        for key in sorted(self.flows):
            per = self.flows[key]
            norm[key] = {tuple(p): float(x) for p, x in sorted(per.items())}
        object.__setattr__(self, "flows", norm)

    @classmethod
    def empty(cls) -> "Outcome":
        return cls(flows={})

    def type_flows(self, key: TypeKey) -> Mapping[Path, float]:
        return self.flows.get(key, {})

    def flow(self, key: TypeKey, path: Path) -> float:
        return self.flows.get(key, {}).get(tuple(path), 0.0)

    def total(self, key: TypeKey) -> float:
        return sum(self.flows.get(key, {}).values())

    def iter_flows(self) -> Iterator[tuple[TypeKey, Path, float]]:
        for key, per in self.flows.items():
            for path, x in per.items():
                yield key, path, x


@dataclass(frozen=True)
class TypeCost:
    """Realized cost of one information type at an outcome.

    ``value`` is the flow-weighted average over the type's used strategies;
    at equilibrium the used strategies share a common cost, so the average
    coincides with it and ``spread`` collapses to (numerical) zero.  For a
    zero-demand type ``value`` is the minimum cost over the whole strategy
    set and ``zero_demand`` is set.
    """

    value: float
    min_used: float | None
    max_used: float | None
    spread: float
    zero_demand: bool = False


@dataclass(frozen=True)
class Violation:
    """One problem found by :func:`validate_game`."""

    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.subject}: {self.message}"


def path_nodes(network: Network, origin: NodeId, path: Path) -> tuple[NodeId, ...]:
    """Node sequence visited by a path starting at ``origin``."""
    nodes = [origin]
    at = origin
    for eid in path:
        at = network.edge(eid).other(at)
        nodes.append(at)
    return tuple(nodes)


def _check_walk(network: Network, path: Path) -> None:
    if not path:
        raise GameError("empty path")
    prev = network.edge(path[0])
    for eid in path[1:]:
        e = network.edge(eid)
        if not (prev.endpoints() & e.endpoints()):
            raise GameError(
                f"edges {prev.id!r} and {eid!r} are not adjacent in the path"
            )
        prev = e


def edge_loads(game: GameSpec, outcome: Outcome) -> LoadVector:
    """Aggregate per-edge loads induced by an outcome.

    Every edge of the irredundant set (the union of all populations'
    relevant edges) gets an entry; edges carried by no flowing strategy
    have load zero.
    """
    loads: LoadVector = {eid: 0.0 for eid in sorted(game.irredundant_edges)}
    for key, path, x in outcome.iter_flows():
        if x == 0.0:
            continue
        if x < 0.0:
            raise GameError(f"negative flow {x} on {key} strategy {path}")
        for eid in path:
            if eid not in loads:
                if not game.network.has_edge(eid):
                    raise GameError(
                        f"strategy of type {key} references unknown edge {eid!r}"
                    )
                loads[eid] = 0.0
            loads[eid] += x
    return loads


def strategy_cost(game: GameSpec, strategy: Path, outcome: Outcome) -> float:
    """Total cost of traversing ``strategy`` at the loads induced by ``outcome``."""
    strategy = tuple(strategy)
    _check_walk(game.network, strategy)
    loads = edge_loads(game, outcome)
    return path_cost_at_loads(game, strategy, loads)


def path_cost_at_loads(game: GameSpec, path: Path, loads: Mapping[EdgeId, float]) -> float:
    return sum(eval_cost(game.cost(eid), loads.get(eid, 0.0)) for eid in path)


def type_cost(
    game: GameSpec,
    itype: InfoType,
    outcome: Outcome,
    strategy_set: Sequence[Path] | None = None,
) -> TypeCost:
    """Cost experienced by one information type at an outcome.

    ``strategy_set`` (the type's full path list) is only required for
    zero-demand types, where the value falls back to the minimum strategy
    cost; it is enumerated on demand when omitted.
    """
    loads = edge_loads(game, outcome)
    used = [
        (path, x)
        for path, x in outcome.type_flows(itype.key).items()
        if x > FLOW_EPS * max(1.0, itype.demand)
    ]
    if itype.demand <= 0.0 or not used:
        if itype.demand > 0.0:
            raise GameError(
                f"type {itype.key} has positive demand but no flowing strategy"
            )
        if strategy_set is None:
            from .pathsets import build_strategy_sets

            strategy_set = build_strategy_sets(game)[itype.key].paths
        if not strategy_set:
            return TypeCost(0.0, None, None, 0.0, zero_demand=True)
        best = min(path_cost_at_loads(game, p, loads) for p in strategy_set)
        return TypeCost(best, None, None, 0.0, zero_demand=True)

    costs = [(path_cost_at_loads(game, p, loads), x) for p, x in used]
    total = sum(x for _, x in costs)
    value = sum(c * x for c, x in costs) / total
    lo = min(c for c, _ in costs)
    hi = max(c for c, _ in costs)
    return TypeCost(value, lo, hi, hi - lo)


def social_cost(game: GameSpec, outcome: Outcome) -> float:
    """Demand-weighted total cost over all information types."""
    out = 0.0
    for t in game.types:
        if t.demand <= 0.0:
            continue
        out += type_cost(game, t, outcome).value * t.demand
    return out


def feasibility_gaps(game: GameSpec, outcome: Outcome) -> dict[TypeKey, float]:
    """Absolute per-type deviation between routed flow and demand."""
    gaps: dict[TypeKey, float] = {}
    for t in game.types:
        gaps[t.key] = abs(outcome.total(t.key) - t.demand)
    return gaps


def is_feasible(game: GameSpec, outcome: Outcome, tol: float = FEASIBILITY_TOL) -> bool:
    if any(x < -FLOW_EPS for _, _, x in outcome.iter_flows()):
        return False
    return all(g <= tol for g in feasibility_gaps(game, outcome).values())


def validate_game(game: GameSpec, path_cap: int | None = None) -> list[Violation]:
    """Report structural problems; an empty list means the game is valid.

    Checks cross-references (unknown edges, known sets outside the owner's
    relevant set, missing cost functions), demands, terminal sanity, edge
    relevance, and that every positive-demand type has at least one
    strategy.
    """
    from .pathsets import DEFAULT_PATH_CAP, enumerate_paths, relevant_edges

    cap = DEFAULT_PATH_CAP if path_cap is None else path_cap
    out: list[Violation] = []
    net = game.network

    ids = [p.id for p in game.populations]
    for pid in sorted({i for i in ids if ids.count(i) > 1}):
        out.append(Violation("duplicate-population", pid, "population id used twice"))
    keys = [t.key for t in game.types]
    for key in sorted({k for k in keys if keys.count(k) > 1}):
        out.append(Violation("duplicate-type", str(key), "type key used twice"))

    pops_with_types = {t.population for t in game.types}
    for p in game.populations:
        subj = f"population {p.id}"
        if p.id not in pops_with_types:
            out.append(Violation("no-types", subj, "population has no information type"))
        if p.origin == p.destination:
            out.append(
                Violation("degenerate-terminals", subj, "origin equals destination")
            )
            continue
        unknown = sorted(e for e in p.relevant_edges if not net.has_edge(e))
        for eid in unknown:
            out.append(Violation("unknown-edge", subj, f"unknown edge {eid!r}"))
        if unknown:
            continue
        if p.origin not in net.nodes or p.destination not in net.nodes:
            out.append(Violation("unknown-node", subj, "terminal not in network"))
            continue
        try:
            usable = relevant_edges(
                net, p.origin, p.destination, p.relevant_edges, cap=cap
            )
        except GameError as exc:
            out.append(Violation("path-explosion", subj, str(exc)))
            continue
        for eid in sorted(p.relevant_edges - usable):
            out.append(
                Violation(
                    "irrelevant-edge",
                    subj,
                    f"edge {eid!r} lies on no origin-destination path",
                )
            )

    for t in game.types:
        subj = f"type {t.key}"
        if t.demand < 0.0:
            out.append(Violation("negative-demand", subj, f"negative demand {t.demand}"))
        if t.population not in {p.id for p in game.populations}:
            out.append(
                Violation("unknown-population", subj, f"population {t.population!r} undeclared")
            )
            continue
        pop = game.population(t.population)
        unknown = sorted(e for e in t.known_edges if not net.has_edge(e))
        for eid in unknown:
            out.append(Violation("unknown-edge", subj, f"unknown edge {eid!r}"))
        for eid in sorted(t.known_edges - pop.relevant_edges - set(unknown)):
            out.append(
                Violation(
                    "known-outside-relevant",
                    subj,
                    f"known edge {eid!r} outside the population's relevant set",
                )
            )
        if unknown or pop.origin == pop.destination:
            continue
        try:
            paths = enumerate_paths(
                net, pop.origin, pop.destination,
                allowed=t.known_edges & pop.relevant_edges, cap=cap,
            )
        except GameError as exc:
            out.append(Violation("path-explosion", subj, str(exc)))
            continue
        if not paths and t.demand > 0.0:
            out.append(
                Violation("empty-strategy-set", subj, "type has empty strategy set")
            )

    for eid in sorted(game.irredundant_edges):
        if net.has_edge(eid) and eid not in game.costs:
            out.append(
                Violation("missing-cost", f"edge {eid}", "no cost function declared")
            )
    return out
