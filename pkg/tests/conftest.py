import numpy as np
import pytest
from hypothesis import settings

from congames.game_core import (
    CostFunction,
    GameSpec,
    InfoType,
    Network,
    Population,
)

settings.register_profile("suite", deadline=None, max_examples=50, derandomize=True)
settings.load_profile("suite")


def wheatstone_network() -> Network:
    return Network.from_edges(
        [
            ("O1", "O", "1"),
            ("1D", "1", "D"),
            ("O2", "O", "2"),
            ("2D", "2", "D"),
            ("12", "1", "2"),
        ]
    )


def wheatstone_game(middle: CostFunction, known=None, demand=1.0) -> GameSpec:
    net = wheatstone_network()
    costs = {
        "O1": CostFunction.polynomial([0.0, 1.0]),
        "1D": CostFunction.constant(1.0),
        "O2": CostFunction.constant(1.0),
        "2D": CostFunction.polynomial([0.0, 1.0]),
        "12": middle,
    }
    edges = frozenset(costs)
    return GameSpec(
        network=net,
        populations=(Population("1", "O", "D", edges),),
        types=(InfoType("1", 1, frozenset(known) if known else edges, demand),),
        costs=costs,
    )


def ring_game(n_edges: int, terminals=(0, 2), demand=1.0, known=None) -> GameSpec:
    nodes = [f"v{i + 1}" for i in range(n_edges)]
    triples = [
        (f"r{i + 1}", nodes[i], nodes[(i + 1) % n_edges]) for i in range(n_edges)
    ]
    net = Network.from_edges(triples)
    edges = frozenset(t[0] for t in triples)
    a, b = terminals
    return GameSpec(
        network=net,
        populations=(Population("1", nodes[a], nodes[b], edges),),
        types=(InfoType("1", 1, frozenset(known) if known else edges, demand),),
        costs={eid: CostFunction.polynomial([0.0, 1.0]) for eid in edges},
    )


def random_network(seed: int, max_nodes: int = 6, edge_prob: float = 0.5) -> Network:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_nodes + 1))
    nodes = [f"n{i}" for i in range(n)]
    triples = []
    counter = 0
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                counter += 1
                triples.append((f"e{counter:02d}", nodes[i], nodes[j]))
            # occasional parallel edge
            if rng.random() < 0.08:
                counter += 1
                triples.append((f"e{counter:02d}", nodes[i], nodes[j]))
    return Network.from_edges(triples, extra_nodes=nodes)


@pytest.fixture
def fig1_before():
    return wheatstone_game(CostFunction.impassable())


@pytest.fixture
def fig1_after():
    return wheatstone_game(CostFunction.polynomial([]))
