"""Equilibrium computation for information-constrained routing games.

The solver minimizes the Beckmann-style potential (sum over edges of the
cost antiderivative at the edge load) over the product of per-type flow
simplices; the minimizers of that convex program are exactly the
information-constrained user equilibria.  ``solve_icue`` performs
convex-combination descent with exact line searches, ``brute_force_icue``
is a deliberately independent sampling oracle over the same feasible set,
and ``equilibrium_gap`` re-verifies any outcome from scratch.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .game_core import (
    DEFAULT_BIG_M,
    FEASIBILITY_TOL,
    FLOW_EPS,
    CostFunction,
    EdgeId,
    GameError,
    GameSpec,
    Outcome,
    Path,
    TypeCost,
    TypeKey,
    cost_integral,
    eval_cost,
    feasibility_gaps,
    social_cost,
    type_cost,
    validate_game,
)
from .pathsets import DEFAULT_PATH_CAP, StrategySet, build_strategy_sets


class SolverError(GameError):
    """Solver-level failures (invalid input, unusable start point)."""


class InfeasibleOutcomeError(GameError):
    """An outcome whose per-type flows do not meet the demands."""


class OracleGuardError(GameError):
    """Instance too large for the exhaustive oracle."""


#: Hard size limit for the brute-force oracle (total paths across types).
ORACLE_MAX_TOTAL_PATHS = 12

_ORACLE_GRID_CAP = 200_000
_ORACLE_STARTS = 2


@dataclass(frozen=True)
class SolverOptions:
    """Tunable solver and oracle parameters.

    ``gap_tolerance`` is relative: a type's excess cost is divided by one
    plus its minimum strategy cost, so zero-cost instances stay well
    defined.  ``step_rule`` selects between exact line searches (default)
    and the parameter-free open-loop blend 2/(k+2).  ``seed`` is reserved
    for randomized restarts; the bundled methods are deterministic.
    """

    gap_tolerance: float = 1e-8
    max_iterations: int = 10_000
    big_m: float = DEFAULT_BIG_M
    grid_resolution: int = 6
    seed: int = 0
    path_cap: int = DEFAULT_PATH_CAP
    compare_tolerance: float = 1e-6
    step_rule: str = "line_search"

    def __post_init__(self) -> None:
        if not self.gap_tolerance > 0:
            raise GameError("gap tolerance must be positive")
        if self.max_iterations < 1:
            raise GameError("max iterations must be at least 1")
        if self.grid_resolution < 2:
            raise GameError("grid resolution must be at least 2")
        if self.step_rule not in ("line_search", "open_loop"):
            raise GameError(f"unknown step rule {self.step_rule!r}")


@dataclass
class EquilibriumResult:
    """Solved outcome with its certificate data.

    ``gaps`` are absolute per-type excess costs; ``relative_gap`` is the
    normalized maximum used for the convergence decision.  ``loads_unique``
    is cleared when some strategy edge has a cost that is not strictly
    increasing, in which case equilibrium loads may be non-unique and
    downstream paradox verdicts become witness-dependent.
    """

    outcome: Outcome
    loads: dict[EdgeId, float]
    type_costs: dict[TypeKey, TypeCost]
    gaps: dict[TypeKey, float]
    relative_gap: float
    iterations: int
    converged: bool
    loads_unique: bool
    potential: float
    social_cost: float
    potential_trace: tuple[float, ...] = ()


# ---------------------------------------------------------------------------
# compiled representation


class _CType:
    __slots__ = ("key", "demand", "paths", "path_edges", "pair_moves")

    def __init__(self, key, demand, paths, path_edges):
        self.key = key
        self.demand = demand
        self.paths = paths
        self.path_edges = path_edges
        # (src, dst) -> (gain edge indices, loss edge indices)
        self.pair_moves = {}
        m = len(paths)
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                si, sj = set(path_edges[i]), set(path_edges[j])
                gain = tuple(sorted(sj - si))
                loss = tuple(sorted(si - sj))
                self.pair_moves[(i, j)] = (gain, loss)


class _Compiled:
    """Index-based view of a game for the inner numeric loops."""

    def __init__(self, game: GameSpec, sets: Mapping[TypeKey, StrategySet]):
        self.game = game
        self.edge_ids = sorted(game.irredundant_edges)
        self.eidx = {eid: i for i, eid in enumerate(self.edge_ids)}
        self.costs = [game.cost(eid) for eid in self.edge_ids]
        self.types: list[_CType] = []
        for key in sorted(sets):
            ss = sets[key]
            demand = game.info_type(key).demand
            path_edges = [tuple(self.eidx[e] for e in p) for p in ss.paths]
            self.types.append(_CType(key, demand, ss.paths, path_edges))

    def initial_flows(self) -> list[list[float]]:
        flows = []
        for t in self.types:
            f = [0.0] * len(t.paths)
            if f and t.demand > 0.0:
                f[0] = t.demand
            flows.append(f)
        return flows

    def loads_of(self, flows: Sequence[Sequence[float]]) -> list[float]:
        loads = [0.0] * len(self.edge_ids)
        for t, f in zip(self.types, flows):
            for pe, x in zip(t.path_edges, f):
                if x != 0.0:
                    for e in pe:
                        loads[e] += x
        return loads

    def cost_at(self, e: int, load: float) -> float:
        fn = self.costs[e]
        if fn.big_m is not None:
            return fn.big_m
        acc = 0.0
        if load < 0.0:
            load = 0.0
        for c in reversed(fn.coeffs):
            acc = acc * load + c
        return acc

    def integral_at(self, e: int, load: float) -> float:
        if load < 0.0:
            load = 0.0
        return cost_integral(self.costs[e], load)

    def path_cost(self, loads: Sequence[float], pe: Sequence[int]) -> float:
        return sum(self.cost_at(e, loads[e]) for e in pe)

    def potential(self, loads: Sequence[float]) -> float:
        return sum(self.integral_at(e, loads[e]) for e in range(len(loads)))

    def type_costs_at(self, loads, t: _CType) -> list[float]:
        return [self.path_cost(loads, pe) for pe in t.path_edges]

    def gap_summary(self, loads, flows):
        """Per-type absolute gaps and the maximum relative gap."""
        gaps: dict[TypeKey, float] = {}
        rel_max = 0.0
        for t, f in zip(self.types, flows):
            if not t.paths:
                gaps[t.key] = 0.0
                continue
            costs = self.type_costs_at(loads, t)
            mn = min(costs)
            eps = FLOW_EPS * max(1.0, t.demand)
            used = [c for c, x in zip(costs, f) if x > eps]
            gap = max(used) - mn if used else 0.0
            gaps[t.key] = gap
            rel_max = max(rel_max, gap / (1.0 + mn))
        return gaps, rel_max

    def loads_unique(self) -> bool:
        seen: set[int] = set()
        for t in self.types:
            for pe in t.path_edges:
                seen.update(pe)
        return all(self.costs[e].strictly_increasing for e in seen)

    def outcome_of(self, flows) -> Outcome:
        data: dict[TypeKey, dict[Path, float]] = {}
        for t, f in zip(self.types, flows):
            data[t.key] = {p: x for p, x in zip(t.paths, f)}
        return Outcome(flows=data)

    def flows_of(self, outcome: Outcome) -> list[list[float]]:
        flows = []
        for t in self.types:
            index = {p: i for i, p in enumerate(t.paths)}
            f = [0.0] * len(t.paths)
            for path, x in outcome.type_flows(t.key).items():
                if path not in index:
                    if x > FLOW_EPS:
                        raise SolverError(
                            f"outcome routes flow on unknown strategy {path} of {t.key}"
                        )
                    continue
                f[index[path]] = x
            flows.append(f)
        return flows


# ---------------------------------------------------------------------------
# public operations


def _require_valid(game: GameSpec, path_cap: int) -> None:
    violations = validate_game(game, path_cap=path_cap)
    if violations:
        raise SolverError(
            "invalid game: " + "; ".join(str(v) for v in violations)
        )


def equilibrium_gap(
    game: GameSpec,
    outcome: Outcome,
    strategy_sets: Mapping[TypeKey, StrategySet] | None = None,
    feasibility_tol: float = FEASIBILITY_TOL,
) -> dict[TypeKey, float]:
    """Per-type excess of used-strategy cost over the best available cost.

    The outcome is an equilibrium iff every gap is (numerically) zero.
    Raises :class:`InfeasibleOutcomeError` when flows are negative, sit on
    unknown strategies, or miss the demands.
    """
    if strategy_sets is None:
        strategy_sets = build_strategy_sets(game)
    for key, path, x in outcome.iter_flows():
        if x < -FLOW_EPS:
            raise InfeasibleOutcomeError(f"negative flow on {key} strategy {path}")
        if x > FLOW_EPS and (
            key not in strategy_sets or path not in strategy_sets[key].paths
        ):
            raise InfeasibleOutcomeError(
                f"flow on strategy {path} outside the set of type {key}"
            )
    for key, gap in feasibility_gaps(game, outcome).items():
        if gap > feasibility_tol:
            raise InfeasibleOutcomeError(
                f"type {key} routes {gap:.3g} away from its demand"
            )
    comp = _Compiled(game, strategy_sets)
    loads = comp.loads_of(comp.flows_of(outcome))
    gaps, _ = comp.gap_summary(loads, comp.flows_of(outcome))
    return gaps


def beckmann_potential(game: GameSpec, outcome: Outcome) -> float:
    """Sum over edges of the cost antiderivative at the induced load."""
    from .game_core import edge_loads

    loads = edge_loads(game, outcome)
    return sum(cost_integral(game.cost(eid), x) for eid, x in loads.items())


def _line_search_eta(comp: _Compiled, loads, gain, loss, eta_max: float) -> float:
    """Exact minimizer of the potential along a flow shift of size eta.

    The directional derivative sum(c_e(f_e+eta)) - sum(c_e(f_e-eta)) is
    nondecreasing in eta (costs are nondecreasing), so bisection on its
    sign finds the minimizer; when even the full shift keeps it
    nonpositive the full shift is optimal.
    """

    def slope(eta: float) -> float:
        s = 0.0
        for e in gain:
            s += comp.cost_at(e, loads[e] + eta)
        for e in loss:
            s -= comp.cost_at(e, loads[e] - eta)
        return s

    if slope(eta_max) <= 0.0:
        return eta_max
    lo, hi = 0.0, eta_max
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if slope(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def _sweep_type(comp: _Compiled, t: _CType, f: list[float], loads: list[float], tol: float) -> None:
    """Shift flow from the type's costliest used strategy to its cheapest."""
    m = len(t.paths)
    if m <= 1 or t.demand <= 0.0:
        return
    eps = FLOW_EPS * max(1.0, t.demand)
    for _ in range(2 * m):
        costs = comp.type_costs_at(loads, t)
        best = 0
        for i in range(1, m):
            if costs[i] < costs[best]:
                best = i
        worst = -1
        for i in range(m):
            if f[i] > eps and (worst < 0 or costs[i] > costs[worst]):
                worst = i
        if worst < 0 or worst == best:
            return
        gap = costs[worst] - costs[best]
        if gap <= 0.25 * tol * (1.0 + costs[best]):
            return
        gain, loss = t.pair_moves[(worst, best)]
        eta_max = f[worst]
        eta = _line_search_eta(comp, loads, gain, loss, eta_max)
        if eta <= 0.0:
            return
        f[best] += eta
        if eta >= eta_max:
            f[worst] = 0.0
        else:
            f[worst] -= eta
        for e in gain:
            loads[e] += eta
        for e in loss:
            loads[e] = max(0.0, loads[e] - eta)


def solve_icue(game: GameSpec, options: SolverOptions | None = None) -> EquilibriumResult:
    """Compute an information-constrained user equilibrium.

    Convex-combination descent on the potential: per iteration each type
    routes flow toward its current-cheapest strategy (ties broken
    lexicographically by path edge-id sequence).  The default step rule
    chooses each shift by exact line search; ``open_loop`` instead blends
    the all-or-nothing target with step 2/(k+2).  Non-convergence is
    reported, never silently ignored.
    """
    opts = options or SolverOptions()
    _require_valid(game, opts.path_cap)
    sets = build_strategy_sets(game, cap=opts.path_cap)
    comp = _Compiled(game, sets)
    flows = comp.initial_flows()
    loads = comp.loads_of(flows)

    trace: list[float] = [comp.potential(loads)]
    gaps, rel = comp.gap_summary(loads, flows)
    converged = rel <= opts.gap_tolerance
    iterations = 0

    for k in range(opts.max_iterations):
        if converged:
            break
        iterations = k + 1
        if opts.step_rule == "open_loop":
            gamma = 2.0 / (k + 2.0)
            for t, f in zip(comp.types, flows):
                if not t.paths or t.demand <= 0.0:
                    continue
                costs = comp.type_costs_at(loads, t)
                best = 0
                for i in range(1, len(costs)):
                    if costs[i] < costs[best]:
                        best = i
                for i in range(len(f)):
                    f[i] *= 1.0 - gamma
                f[best] += gamma * t.demand
            loads = comp.loads_of(flows)
        else:
            for t, f in zip(comp.types, flows):
                _sweep_type(comp, t, f, loads, opts.gap_tolerance)
            loads = comp.loads_of(flows)
        trace.append(comp.potential(loads))
        gaps, rel = comp.gap_summary(loads, flows)
        converged = rel <= opts.gap_tolerance

    outcome = comp.outcome_of(flows)
    return _finalize(game, comp, sets, outcome, loads, gaps, rel,
                     iterations, converged, tuple(trace))


def _finalize(game, comp, sets, outcome, loads, gaps, rel, iterations, converged, trace):
    load_map = {eid: loads[comp.eidx[eid]] for eid in comp.edge_ids}
    costs = {
        t.key: type_cost(game, game.info_type(t.key), outcome,
                         strategy_set=sets[t.key].paths)
        for t in comp.types
    }
    return EquilibriumResult(
        outcome=outcome,
        loads=load_map,
        type_costs=costs,
        gaps=gaps,
        relative_gap=rel,
        iterations=iterations,
        converged=converged,
        loads_unique=comp.loads_unique(),
        potential=comp.potential(loads),
        social_cost=social_cost(game, outcome),
        potential_trace=trace,
    )


# ---------------------------------------------------------------------------
# brute-force oracle


def _compositions(total: int, parts: int):
    """All nonnegative integer vectors of given length summing to total."""
    if parts == 1:
        yield (total,)
        return
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        comp = []
        for b in bars:
            comp.append(b - prev - 1)
            prev = b
        comp.append(total + parts - 2 - prev)
        yield tuple(comp)


def _candidate_matrix(demand: float, m: int, resolution: int) -> np.ndarray:
    if m == 0:
        return np.zeros((1, 0))
    if demand <= 0.0:
        return np.zeros((1, m))
    if m == 1:
        return np.full((1, 1), demand)
    rows = [c for c in _compositions(resolution, m)]
    return np.asarray(rows, dtype=float) * (demand / resolution)


def _grid_sizes(types: Sequence[_CType], resolution: int) -> list[int]:
    sizes = []
    for t in types:
        m = len(t.paths)
        if m <= 1 or t.demand <= 0.0:
            sizes.append(1)
        else:
            sizes.append(math.comb(resolution + m - 1, m - 1))
    return sizes


def _integral_array(fn: CostFunction, loads: np.ndarray) -> np.ndarray:
    if fn.big_m is not None:
        return fn.big_m * loads
    coeffs = np.array([0.0] + [c / (j + 1) for j, c in enumerate(fn.coeffs)])
    return np.polynomial.polynomial.polyval(loads, coeffs)


def brute_force_icue(game: GameSpec, options: SolverOptions | None = None) -> EquilibriumResult:
    """Independent equilibrium oracle: grid search plus local refinement.

    Samples the product of per-type flow simplices at the configured
    resolution, keeps the best cells by potential, then refines each by
    feasibility-preserving pairwise flow exchanges over shrinking windows.
    Guarded to instances with at most ``ORACLE_MAX_TOTAL_PATHS`` paths.
    """
    opts = options or SolverOptions()
    _require_valid(game, opts.path_cap)
    sets = build_strategy_sets(game, cap=opts.path_cap)
    total_paths = sum(len(s.paths) for s in sets.values())
    if total_paths > ORACLE_MAX_TOTAL_PATHS:
        raise OracleGuardError(
            f"{total_paths} total paths exceed the oracle guard "
            f"({ORACLE_MAX_TOTAL_PATHS})"
        )
    comp = _Compiled(game, sets)

    resolution = max(2, opts.grid_resolution)
    while resolution > 2 and math.prod(_grid_sizes(comp.types, resolution)) > _ORACLE_GRID_CAP:
        resolution -= 1

    candidates = [
        _candidate_matrix(t.demand, len(t.paths), resolution) for t in comp.types
    ]
    n_edges = len(comp.edge_ids)
    incidences = []
    for t in comp.types:
        inc = np.zeros((len(t.paths), n_edges))
        for i, pe in enumerate(t.path_edges):
            for e in pe:
                inc[i, e] += 1.0
        incidences.append(inc)

    loads_grid = np.zeros((1, n_edges))
    for cand, inc in zip(candidates, incidences):
        contrib = cand @ inc if cand.shape[1] else np.zeros((1, n_edges))
        loads_grid = (loads_grid[:, None, :] + contrib[None, :, :]).reshape(
            -1, n_edges
        )
    potential_grid = np.zeros(loads_grid.shape[0])
    for e, fn in enumerate(comp.costs):
        potential_grid += _integral_array(fn, loads_grid[:, e])

    order = np.argsort(potential_grid, kind="stable")
    shape = tuple(max(1, c.shape[0]) for c in candidates)
    starts = []
    for flat in order[:_ORACLE_STARTS]:
        idx = np.unravel_index(int(flat), shape)
        flows = []
        for t, cand, i in zip(comp.types, candidates, idx):
            row = cand[i] if cand.shape[1] else np.zeros(0)
            flows.append([float(x) for x in row])
        starts.append(flows)

    best_flows = None
    best_phi = math.inf
    cycles_used = 0
    cell = 1.0 / resolution
    for flows in starts:
        refined, phi, cycles = _refine(comp, flows, cell)
        cycles_used = max(cycles_used, cycles)
        if phi < best_phi - 1e-15:
            best_phi = phi
            best_flows = refined
    assert best_flows is not None

    loads = comp.loads_of(best_flows)
    gaps, rel = comp.gap_summary(loads, best_flows)
    outcome = comp.outcome_of(best_flows)
    return _finalize(
        game, comp, sets, outcome, loads, gaps, rel,
        cycles_used, rel <= opts.gap_tolerance, (),
    )


def _refine(comp: _Compiled, flows: list[list[float]], cell: float):
    """Pairwise-exchange descent with shrinking windows (sampling only)."""
    loads = comp.loads_of(flows)
    phi = comp.potential(loads)
    windows = [cell * max(t.demand, 0.0) for t in comp.types]
    scale = max([1.0] + [t.demand for t in comp.types])
    floor = 1e-9 * scale
    cycles = 0
    for _ in range(600):
        cycles += 1
        improved = False
        for ti, (t, f) in enumerate(zip(comp.types, flows)):
            m = len(t.paths)
            if m <= 1 or t.demand <= 0.0 or windows[ti] <= 0.0:
                continue
            w = windows[ti]
            for i in range(m):
                if f[i] <= 0.0:
                    continue
                for j in range(m):
                    if i == j:
                        continue
                    eta = min(w, f[i])
                    if eta <= 0.0:
                        continue
                    gain, loss = t.pair_moves[(i, j)]
                    delta = 0.0
                    for e in gain:
                        delta += comp.integral_at(e, loads[e] + eta) - comp.integral_at(e, loads[e])
                    for e in loss:
                        delta += comp.integral_at(e, loads[e] - eta) - comp.integral_at(e, loads[e])
                    if delta < -1e-15 * (1.0 + abs(phi)):
                        f[j] += eta
                        f[i] -= eta
                        if f[i] < 0.0:
                            f[i] = 0.0
                        for e in gain:
                            loads[e] += eta
                        for e in loss:
                            loads[e] = max(0.0, loads[e] - eta)
                        phi += delta
                        improved = True
        if not improved:
            windows = [w * 0.5 for w in windows]
            if max(windows, default=0.0) < floor:
                break
    loads = comp.loads_of(flows)
    return flows, comp.potential(loads), cycles


# ---------------------------------------------------------------------------
# best-response dynamics


def best_response_trace(
    game: GameSpec,
    start: Outcome,
    rounds: int,
    shift_fraction: float,
    options: SolverOptions | None = None,
) -> list[Outcome]:
    """One-step improvement dynamics from a feasible starting outcome.

    Each round every type moves ``shift_fraction`` of the flow on its
    costliest used strategy to its cheapest strategy, all moves evaluated
    at the round's starting loads.  The full trace (including the start)
    is returned; convergence is not guaranteed and not assumed.
    """
    opts = options or SolverOptions()
    _require_valid(game, opts.path_cap)
    if not 0.0 <= shift_fraction <= 1.0:
        raise SolverError("shift fraction must lie in [0, 1]")
    sets = build_strategy_sets(game, cap=opts.path_cap)
    comp = _Compiled(game, sets)
    flows = comp.flows_of(start)
    for key, gap in feasibility_gaps(game, comp.outcome_of(flows)).items():
        if gap > FEASIBILITY_TOL:
            raise InfeasibleOutcomeError(
                f"start outcome misses the demand of type {key} by {gap:.3g}"
            )

    trace = [comp.outcome_of(flows)]
    for _ in range(rounds):
        loads = comp.loads_of(flows)
        for t, f in zip(comp.types, flows):
            m = len(t.paths)
            if m <= 1 or t.demand <= 0.0:
                continue
            eps = FLOW_EPS * max(1.0, t.demand)
            costs = comp.type_costs_at(loads, t)
            best = 0
            for i in range(1, m):
                if costs[i] < costs[best]:
                    best = i
            worst = -1
            for i in range(m):
                if f[i] > eps and (worst < 0 or costs[i] > costs[worst]):
                    worst = i
            if worst < 0 or worst == best:
                continue
            if costs[worst] - costs[best] <= 1e-12 * (1.0 + costs[best]):
                continue
            eta = shift_fraction * f[worst]
            f[worst] -= eta
            f[best] += eta
        trace.append(comp.outcome_of(flows))
    return trace
