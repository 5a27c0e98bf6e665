"""Classification of networks and set systems.

Covers the structural predicates the paradox analysis relies on: simple /
tree / ring recognition, linear independence (every route owns a private
edge), series-linearly-independent decomposition at origin-destination
separating vertices, matroid circuit axioms, circuit games (every
population's relevant network is a single cycle), coincident blocks of two
decompositions, and a two-parallel-route embedding test.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, islice
from typing import Iterable, Mapping

from .game_core import (
    EdgeId,
    GameError,
    GameSpec,
    Network,
    NodeId,
    Path,
    path_nodes,
)
from .pathsets import DEFAULT_PATH_CAP, enumerate_paths, iter_simple_paths


# ---------------------------------------------------------------------------
# basic shape predicates


def _components(network: Network) -> list[set[NodeId]]:
    seen: set[NodeId] = set()
    comps: list[set[NodeId]] = []
    for start in sorted(network.nodes):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            node = stack.pop()
            for e in network.incident(node):
                nxt = e.other(node)
                if nxt not in comp:
                    comp.add(nxt)
                    stack.append(nxt)
        seen |= comp
        comps.append(comp)
    return comps


def is_connected(network: Network) -> bool:
    if not network.nodes:
        raise GameError("empty network")
    return len(_components(network)) == 1


def is_simple(network: Network) -> bool:
    """True iff there is at most one edge between any pair of nodes."""
    seen: set[frozenset[NodeId]] = set()
    for e in network.edges:
        pair = e.endpoints()
        if pair in seen:
            return False
        seen.add(pair)
    return True


def parallel_edge_groups(network: Network) -> list[tuple[EdgeId, ...]]:
    groups: dict[frozenset[NodeId], list[EdgeId]] = {}
    for e in network.edges:
        groups.setdefault(e.endpoints(), []).append(e.id)
    return [tuple(g) for g in groups.values() if len(g) > 1]


def is_tree(network: Network) -> bool:
    """Connected, simple, and free of cycles."""
    if not network.nodes:
        raise GameError("empty network")
    return (
        is_connected(network)
        and len(network.edges) == len(network.nodes) - 1
        and is_simple(network)
    )


def is_ring(network: Network) -> bool:
    """A single continuous loop: connected, simple, every node of degree 2."""
    if not network.nodes:
        raise GameError("empty network")
    if not is_simple(network):
        return False
    if any(network.degree(n) != 2 for n in network.nodes):
        return False
    return is_connected(network)


def is_single_cycle(network: Network) -> bool:
    """Connected with every node of degree exactly 2 (parallel pair allowed)."""
    if not network.nodes:
        return False
    if any(network.degree(n) != 2 for n in network.nodes):
        return False
    return is_connected(network)


# ---------------------------------------------------------------------------
# linear independence and series decomposition


@dataclass(frozen=True)
class LiReport:
    """Outcome of the private-edge test between two terminals."""

    is_li: bool
    paths: tuple[Path, ...]
    private_edges: Mapping[Path, EdgeId]
    violating_path: Path | None = None

    def __bool__(self) -> bool:
        return self.is_li


def is_li(
    network: Network,
    origin: NodeId,
    destination: NodeId,
    allowed: Iterable[EdgeId] | None = None,
    cap: int = DEFAULT_PATH_CAP,
) -> LiReport:
    """Linear independence: every O-D path owns an edge no other path uses.

    The witness maps each path to one private edge; on failure
    ``violating_path`` is the first (lexicographic) path without one.
    A network with no O-D path is vacuously independent.
    """
    paths = enumerate_paths(network, origin, destination, allowed=allowed, cap=cap)
    counts: dict[EdgeId, int] = {}
    for p in paths:
        for eid in p:
            counts[eid] = counts.get(eid, 0) + 1
    private: dict[Path, EdgeId] = {}
    for p in paths:
        own = next((eid for eid in p if counts[eid] == 1), None)
        if own is None:
            return LiReport(False, tuple(paths), dict(private), violating_path=p)
        private[p] = own
    return LiReport(True, tuple(paths), private)


@dataclass(frozen=True)
class SeriesBlock:
    """One segment of a series decomposition, with its own terminals."""

    origin: NodeId
    destination: NodeId
    edges: frozenset[EdgeId]
    li: LiReport

    @property
    def terminals(self) -> frozenset[NodeId]:
        return frozenset((self.origin, self.destination))


@dataclass(frozen=True)
class SliReport:
    """Series decomposition into blocks, each tested for linear independence."""

    is_sli: bool
    blocks: tuple[SeriesBlock, ...]
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.is_sli


def is_sli(
    network: Network,
    origin: NodeId,
    destination: NodeId,
    allowed: Iterable[EdgeId] | None = None,
    cap: int = DEFAULT_PATH_CAP,
) -> SliReport:
    """Series-linear-independence between two terminals.

    The network (restricted to edges on at least one O-D path) is split at
    every vertex separating origin from destination; it qualifies iff every
    resulting block passes :func:`is_li`.  Irrelevant edges are stripped
    before the test.
    """
    paths = enumerate_paths(network, origin, destination, allowed=allowed, cap=cap)
    if not paths:
        return SliReport(False, (), reason="terminals are not connected")

    node_seqs = [path_nodes(network, origin, p) for p in paths]
    interior = set(node_seqs[0][1:-1])
    for seq in node_seqs[1:]:
        interior &= set(seq[1:-1])
    # Vertices on every path are exactly the O-D separators; they appear in
    # the same order along each path, so the first path fixes the chain.
    separators = [n for n in node_seqs[0] if n in interior]
    chain = [origin, *separators, destination]
    terminal_rank = {n: i for i, n in enumerate(chain)}

    block_edges: dict[int, set[EdgeId]] = {i: set() for i in range(len(chain) - 1)}
    for path, seq in zip(paths, node_seqs):
        segment = terminal_rank[origin]
        for eid, node in zip(path, seq[1:]):
            block_edges[segment].add(eid)
            if node in terminal_rank:
                if terminal_rank[node] != segment + 1:
                    raise GameError("inconsistent series decomposition")
                segment += 1

    blocks: list[SeriesBlock] = []
    ok = True
    for i in range(len(chain) - 1):
        o, d = chain[i], chain[i + 1]
        li = is_li(network, o, d, allowed=block_edges[i], cap=cap)
        blocks.append(SeriesBlock(o, d, frozenset(block_edges[i]), li))
        ok = ok and li.is_li
    reason = None if ok else "a series block fails the private-edge test"
    return SliReport(ok, tuple(blocks), reason=reason)


def has_pigou_embedding(
    network: Network, origin: NodeId, destination: NodeId
) -> bool:
    """True iff at least two distinct simple O-D paths exist.

    On an acyclic connected network the O-D path is unique, so only
    networks embedding a two-parallel-route core can pass.
    """
    first_two = list(islice(iter_simple_paths(network, origin, destination), 2))
    return len(first_two) >= 2


# ---------------------------------------------------------------------------
# set systems and circuit games


@dataclass(frozen=True)
class SetSystem:
    """A ground set together with a family of member subsets."""

    ground: frozenset[EdgeId]
    members: tuple[frozenset[EdgeId], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ground", frozenset(self.ground))
        object.__setattr__(
            self, "members", tuple(frozenset(m) for m in self.members)
        )


@dataclass(frozen=True)
class CircuitAxiomReport:
    ok: bool
    violation: str | None = None
    witness: tuple[frozenset[EdgeId], ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def check_circuit_axioms(system: SetSystem) -> CircuitAxiomReport:
    """Verify the three circuit axioms, returning the first violation.

    (1) the empty set is not a member; (2) members form an antichain under
    inclusion; (3) elimination: two distinct members sharing an element e
    admit a third member inside their union minus e.
    """
    members = sorted(set(system.members), key=sorted)
    for m in members:
        if not m <= system.ground:
            return CircuitAxiomReport(
                False, "member not contained in the ground set", (m,)
            )
    for m in members:
        if not m:
            return CircuitAxiomReport(False, "empty member", (m,))
    for c1, c2 in combinations(members, 2):
        if c1 < c2 or c2 < c1:
            return CircuitAxiomReport(
                False, "one member strictly contains another", (c1, c2)
            )
    for c1, c2 in combinations(members, 2):
        union = c1 | c2
        for e in sorted(c1 & c2):
            target = union - {e}
            if not any(c3 <= target for c3 in members):
                return CircuitAxiomReport(
                    False,
                    f"no member avoids shared element {e!r} inside the union",
                    (c1, c2),
                )
    return CircuitAxiomReport(True)


@dataclass(frozen=True)
class CircuitGameReport:
    is_circuit_game: bool
    reason: str | None = None
    cycles: Mapping[str, tuple[EdgeId, ...]] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.is_circuit_game


def is_circuit_game(game: GameSpec) -> CircuitGameReport:
    """True iff every population's relevant network is a single cycle.

    Requires the whole game network to be simple: with a parallel pair, a
    population able to use one of the two edges must be able to use the
    other, forcing a two-edge relevant cycle shared by indistinct
    populations -- so a specific diagnostic is emitted for parallel edges.
    """
    groups = parallel_edge_groups(game.network)
    if groups:
        return CircuitGameReport(
            False,
            reason=(
                "network is not simple: parallel edges "
                f"{sorted(groups)}; a circuit game requires a simple network"
            ),
        )
    cycles: dict[str, tuple[EdgeId, ...]] = {}
    for p in game.populations:
        if not p.relevant_edges:
            return CircuitGameReport(
                False, reason=f"population {p.id} has no relevant edges"
            )
        sub = game.network.subnetwork(p.relevant_edges)
        if not is_single_cycle(sub):
            return CircuitGameReport(
                False,
                reason=(
                    f"relevant network of population {p.id} is not a single cycle"
                ),
            )
        cycles[p.id] = tuple(sorted(p.relevant_edges))
    return CircuitGameReport(True, cycles=cycles)


@dataclass(frozen=True)
class CoincidentBlocksReport:
    """Shared series blocks of two populations and the overlap condition.

    The condition holds when the populations' edge intersection equals the
    union of their coincident blocks (a block is coincident when both
    decompositions contain it with the same unordered terminal pair and the
    same edge set); an empty intersection satisfies it vacuously.
    """

    blocks: tuple[SeriesBlock, ...]
    condition_holds: bool
    intersection: frozenset[EdgeId]


def coincident_blocks(
    game: GameSpec, pop_i: str, pop_j: str, cap: int = DEFAULT_PATH_CAP
) -> CoincidentBlocksReport:
    """Coincident series blocks of two populations' relevant networks.

    Both relevant networks must be SLI; terminal pairs are compared
    unordered.
    """
    pi = game.population(pop_i)
    pj = game.population(pop_j)
    rep_i = is_sli(game.network, pi.origin, pi.destination, allowed=pi.relevant_edges, cap=cap)
    rep_j = is_sli(game.network, pj.origin, pj.destination, allowed=pj.relevant_edges, cap=cap)
    if not rep_i.is_sli:
        raise GameError(f"relevant network of population {pop_i!r} is not SLI")
    if not rep_j.is_sli:
        raise GameError(f"relevant network of population {pop_j!r} is not SLI")

    index_j = {(b.terminals, b.edges) for b in rep_j.blocks}
    shared = tuple(
        b for b in rep_i.blocks if (b.terminals, b.edges) in index_j
    )
    covered: set[EdgeId] = set()
    for b in shared:
        covered |= b.edges
    inter = frozenset(pi.relevant_edges & pj.relevant_edges)
    return CoincidentBlocksReport(
        blocks=shared,
        condition_holds=(inter == frozenset(covered)),
        intersection=inter,
    )


# ---------------------------------------------------------------------------
# immunity certificates


class ImmunityVerdict(str, Enum):
    IMMUNE_SLI = "immune-sli"
    IMMUNE_CIRCUIT_GAME = "immune-circuit-game"
    IMMUNE_COINCIDENT_BLOCKS = "immune-coincident-blocks"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ImmunityCertificate:
    """Verdict plus the witnesses that justify it.

    ``UNKNOWN`` means no sufficient condition applied, not that the game is
    vulnerable; the single-OD criterion is the only two-sided one, and a
    note records when it cuts the other way.
    """

    verdict: ImmunityVerdict
    witnesses: Mapping[str, object]
    notes: tuple[str, ...] = ()


def immunity_certificate(game: GameSpec, cap: int = DEFAULT_PATH_CAP) -> ImmunityCertificate:
    """Certify immunity to cost increases from information expansion.

    Checks, in order: a single-OD game on an SLI network; a circuit game;
    all relevant networks SLI with every pairwise overlap made of
    coincident blocks.  Anything else is UNKNOWN.
    """
    notes: list[str] = []
    od_pairs = {(p.origin, p.destination) for p in game.populations}
    if len(od_pairs) == 1:
        origin, destination = next(iter(od_pairs))
        rep = is_sli(
            game.network, origin, destination,
            allowed=game.irredundant_edges, cap=cap,
        )
        if rep.is_sli:
            return ImmunityCertificate(
                ImmunityVerdict.IMMUNE_SLI, {"sli": rep}, ()
            )
        notes.append(
            "two-terminal network is not SLI: IBP possible for some costs "
            "and information sets"
        )

    circuit = is_circuit_game(game)
    if circuit.is_circuit_game:
        return ImmunityCertificate(
            ImmunityVerdict.IMMUNE_CIRCUIT_GAME,
            {"circuit_game": circuit},
            tuple(notes),
        )

    sli_reports: dict[str, SliReport] = {}
    all_sli = bool(game.populations)
    for p in game.populations:
        rep = is_sli(
            game.network, p.origin, p.destination,
            allowed=p.relevant_edges, cap=cap,
        )
        sli_reports[p.id] = rep
        all_sli = all_sli and rep.is_sli
    if all_sli:
        pair_reports: dict[tuple[str, str], CoincidentBlocksReport] = {}
        ok = True
        for a, b in combinations(sorted(sli_reports), 2):
            rep = coincident_blocks(game, a, b, cap=cap)
            pair_reports[(a, b)] = rep
            if not rep.condition_holds:
                ok = False
                break
        if ok:
            return ImmunityCertificate(
                ImmunityVerdict.IMMUNE_COINCIDENT_BLOCKS,
                {"sli": sli_reports, "pairs": pair_reports},
                tuple(notes),
            )
    return ImmunityCertificate(ImmunityVerdict.UNKNOWN, {}, tuple(notes))
