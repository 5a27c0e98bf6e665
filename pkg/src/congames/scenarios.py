"""Builtin scenarios: small instances with documented golden numbers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .game_core import (
    DEFAULT_BIG_M,
    CostFunction,
    EdgeId,
    GameError,
    GameSpec,
    InfoType,
    Network,
    Population,
)
from .paradox import Expansion

SCENARIO_IDS = (
    "wheatstone_bp",
    "wheatstone_ibp",
    "pigou_ibpsc",
    "two_pop_ring",
    "grid_2x3",
    "stadium_ring",
)


@dataclass(frozen=True)
class Scenario:
    id: str
    description: str
    game: GameSpec
    paradox_kind: str | None = None
    expansion: Expansion | None = None
    modified_costs: Mapping[EdgeId, CostFunction] | None = None


def _wheatstone(middle: CostFunction) -> tuple[Network, dict[str, CostFunction]]:
    net = Network.from_edges(
        [
            ("O1", "O", "1"),
            ("1D", "1", "D"),
            ("O2", "O", "2"),
            ("2D", "2", "D"),
            ("12", "1", "2"),
        ]
    )
    costs = {
        "O1": CostFunction.polynomial([0.0, 1.0]),
        "1D": CostFunction.constant(1.0),
        "O2": CostFunction.constant(1.0),
        "2D": CostFunction.polynomial([0.0, 1.0]),
        "12": middle,
    }
    return net, costs


def _wheatstone_bp(big_m: float) -> Scenario:
    net, costs = _wheatstone(CostFunction.impassable(big_m))
    edges = frozenset(costs)
    game = GameSpec(
        network=net,
        populations=(Population("1", "O", "D", edges),),
        types=(InfoType("1", 1, edges, 1.0),),
        costs=costs,
    )
    return Scenario(
        id="wheatstone_bp",
        description=(
            "Unit demand crossing the diamond with an impassable crossbar: "
            "the half/half split costs 1.5.  Dropping the crossbar cost to "
            "zero pulls everyone onto the zigzag route and the social cost "
            "rises to 2."
        ),
        game=game,
        paradox_kind="BP",
        modified_costs={"12": CostFunction.polynomial([])},
    )


def _wheatstone_ibp(big_m: float) -> Scenario:
    net, costs = _wheatstone(CostFunction.polynomial([]))
    edges = frozenset(costs)
    outer = frozenset({"O1", "1D", "O2", "2D"})
    game = GameSpec(
        network=net,
        populations=(Population("1", "O", "D", edges),),
        types=(InfoType("1", 1, outer, 1.0),),
        costs=costs,
    )
    return Scenario(
        id="wheatstone_ibp",
        description=(
            "The same diamond with a free crossbar that players initially do "
            "not know about.  Revealing it raises the informed players' own "
            "equilibrium cost from 1.5 to 2."
        ),
        game=game,
        paradox_kind="IBP",
        expansion=Expansion(target=("1", 1), added_edges=frozenset({"12"})),
    )


def _pigou_ibpsc(big_m: float) -> Scenario:
    net = Network.from_edges([("e1", "O", "D"), ("e2", "O", "D")])
    costs = {
        "e1": CostFunction.polynomial([0.0, 1.0]),
        "e2": CostFunction.constant(2.0),
    }
    edges = frozenset(costs)
    game = GameSpec(
        network=net,
        populations=(
            Population("1", "O", "D", edges),
            Population("2", "O", "D", edges),
        ),
        types=(
            InfoType("1", 1, frozenset({"e2"}), 1.0),
            InfoType("2", 1, edges, 1.0),
        ),
        costs=costs,
    )
    return Scenario(
        id="pigou_ibpsc",
        description=(
            "Two parallel routes, one load-proportional and one flat at 2.  "
            "The restricted population starts on the flat route (social cost "
            "3); telling it about the load-proportional route drags all "
            "demand there and the social cost rises to 4 while the informed "
            "population's own cost stays 2.  Note the restricted population "
            "must start on the flat route for these numbers: starting it on "
            "the load-proportional route instead yields social cost 4 before "
            "any expansion."
        ),
        game=game,
        paradox_kind="IBPSC",
        expansion=Expansion(target=("1", 1), added_edges=frozenset({"e1"})),
    )


def _two_pop_ring(big_m: float) -> Scenario:
    net = Network.from_edges(
        [
            ("e1", "O1", "O2"),
            ("e2", "O2", "D1"),
            ("e3", "O1", "D2"),
            ("e4", "D2", "D1"),
        ]
    )
    edges = frozenset(net.edge_ids)
    costs = {eid: CostFunction.polynomial([0.0, 1.0]) for eid in edges}
    game = GameSpec(
        network=net,
        populations=(
            Population("1", "O1", "D1", edges),
            Population("2", "O2", "D2", edges),
        ),
        types=(
            InfoType("1", 1, frozenset({"e1", "e2"}), 1.0),
            InfoType("1", 2, edges, 1.0),
            InfoType("2", 1, edges, 1.0),
        ),
        costs=costs,
    )
    return Scenario(
        id="two_pop_ring",
        description=(
            "Two populations with interleaved terminals on a four-edge ring; "
            "each relevant network is the whole ring, so the game is a "
            "circuit game and immune to information-expansion harm."
        ),
        game=game,
        paradox_kind="IBP",
        expansion=Expansion(target=("1", 1), added_edges=frozenset({"e3", "e4"})),
    )


def _grid_2x3(big_m: float) -> Scenario:
    net = Network.from_edges(
        [
            ("h00", "n00", "n10"),
            ("h10", "n10", "n20"),
            ("h01", "n01", "n11"),
            ("h11", "n11", "n21"),
            ("v0", "n00", "n01"),
            ("v1", "n10", "n11"),
            ("v2", "n20", "n21"),
        ]
    )
    edges = frozenset(net.edge_ids)
    costs = {eid: CostFunction.polynomial([0.0, 1.0]) for eid in edges}
    game = GameSpec(
        network=net,
        populations=(Population("1", "n00", "n21", edges),),
        types=(InfoType("1", 1, edges, 1.0),),
        costs=costs,
    )
    return Scenario(
        id="grid_2x3",
        description=(
            "A 2x3 grid road system with corner-to-corner demand.  The "
            "diamond-with-crossbar pattern sits inside every grid, so the "
            "network is not SLI and no immunity certificate applies."
        ),
        game=game,
    )


def _stadium_ring(big_m: float) -> Scenario:
    n = 8
    triples = [(f"r{i + 1}", f"g{i + 1}", f"g{(i + 1) % n + 1}") for i in range(n)]
    net = Network.from_edges(triples)
    edges = frozenset(net.edge_ids)
    costs = {eid: CostFunction.polynomial([0.0, 1.0]) for eid in edges}
    game = GameSpec(
        network=net,
        populations=(
            Population("1", "g1", "g5", edges),
            Population("2", "g3", "g7", edges),
            Population("3", "g2", "g6", edges),
        ),
        types=(
            InfoType("1", 1, edges, 1.0),
            InfoType("2", 1, edges, 1.0),
            InfoType("3", 1, edges, 1.0),
        ),
        costs=costs,
    )
    return Scenario(
        id="stadium_ring",
        description=(
            "Stadium evacuation: seat blocks exit onto a ring concourse and "
            "each crowd heads for its own gate, so every relevant network is "
            "the ring and extra signage cannot hurt anyone.  Short-cuts "
            "between seat blocks would break the circuit structure and, with "
            "it, the immunity guarantee."
        ),
        game=game,
    )


_BUILDERS = {
    "wheatstone_bp": _wheatstone_bp,
    "wheatstone_ibp": _wheatstone_ibp,
    "pigou_ibpsc": _pigou_ibpsc,
    "two_pop_ring": _two_pop_ring,
    "grid_2x3": _grid_2x3,
    "stadium_ring": _stadium_ring,
}


def builtin_scenario(scenario_id: str, big_m: float = DEFAULT_BIG_M) -> Scenario:
    """Construct a builtin scenario; unknown ids raise."""
    try:
        builder = _BUILDERS[scenario_id]
    except KeyError:
        raise GameError(
            f"unknown scenario {scenario_id!r}; available: {', '.join(SCENARIO_IDS)}"
        ) from None
    return builder(big_m)
