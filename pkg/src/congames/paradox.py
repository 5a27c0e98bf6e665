"""Detection and search of Braess-style paradoxes.

Three comparisons share one shape: solve an instance, solve a perturbed
instance, compare costs.  ``detect_bp`` perturbs costs/demands downward,
``detect_ibp`` expands one type's information set and watches that type,
``detect_ibpsc`` does the same but watches the social cost.  The verdict is
withheld (never silently defaulted) when either solve fails to converge,
and downgraded to witness-dependent when equilibrium loads may be
non-unique.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Mapping

from .game_core import (
    CostFunction,
    EdgeId,
    GameError,
    GameSpec,
    InfoType,
    TypeKey,
    validate_game,
)
from .equilibrium import EquilibriumResult, SolverOptions, solve_icue
from .pathsets import build_strategy_sets

CONFIDENCE_CERTIFIED = "certified"
CONFIDENCE_WITNESS_DEPENDENT = "witness-dependent"


class ExpansionError(GameError):
    """Invalid information expansion."""


class DominanceError(GameError):
    """Modified game is not a pointwise reduction of the original."""


class VerdictWithheld(GameError):
    """A solve did not converge, so no paradox verdict is issued."""


@dataclass(frozen=True)
class Expansion:
    """Strict enlargement of one type's known edge set.

    Added edges must lie inside the owner population's relevant set.  Any
    type may be targeted; detectors treat the target as the canonical
    expanded type.
    """

    target: TypeKey
    added_edges: frozenset[EdgeId]

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", (str(self.target[0]), int(self.target[1])))
        object.__setattr__(self, "added_edges", frozenset(self.added_edges))


@dataclass(frozen=True)
class ParadoxVerdict:
    kind: str
    before: EquilibriumResult
    after: EquilibriumResult
    delta: float
    occurred: bool
    confidence: str
    target: TypeKey | None = None

    @property
    def social_cost_delta(self) -> float:
        return self.after.social_cost - self.before.social_cost


@dataclass(frozen=True)
class NotAllWorseReport:
    """Per-type cost deltas of an expansion on a circuit game."""

    ok: bool
    deltas: Mapping[TypeKey, float]
    before: EquilibriumResult
    after: EquilibriumResult


def expand_information(game: GameSpec, expansion: Expansion) -> GameSpec:
    """Return the game with the target type's known edges enlarged.

    The expansion must be strict and stay inside the owner population's
    relevant set.  A warning is emitted when the enlarged set admits no new
    route (the strategy set, and hence every equilibrium, is unchanged).
    """
    target = game.info_type(expansion.target)
    pop = game.population(target.population)
    if not expansion.added_edges:
        raise ExpansionError("expansion adds no edges")
    outside = expansion.added_edges - pop.relevant_edges
    if outside:
        raise ExpansionError(
            f"added edges {sorted(outside)} lie outside the relevant set of "
            f"population {pop.id!r}"
        )
    new_known = target.known_edges | expansion.added_edges
    if new_known == target.known_edges:
        raise ExpansionError(
            f"expansion of type {target.key} is not strict: all added edges "
            "are already known"
        )
    new_types = tuple(
        replace(t, known_edges=new_known) if t.key == target.key else t
        for t in game.types
    )
    expanded = replace(game, types=new_types)

    before_paths = build_strategy_sets(game)[target.key].paths
    after_paths = build_strategy_sets(expanded)[target.key].paths
    if before_paths == after_paths:
        warnings.warn(
            f"expansion of type {target.key} adds no usable route; "
            "equilibria are unchanged",
            stacklevel=2,
        )
    return expanded


def _solve_pair(
    game: GameSpec, other: GameSpec, options: SolverOptions | None
) -> tuple[EquilibriumResult, EquilibriumResult]:
    before = solve_icue(game, options)
    after = solve_icue(other, options)
    problems = []
    if not before.converged:
        problems.append(
            f"base solve stopped at relative gap {before.relative_gap:.3g} "
            f"after {before.iterations} iterations"
        )
    if not after.converged:
        problems.append(
            f"perturbed solve stopped at relative gap {after.relative_gap:.3g} "
            f"after {after.iterations} iterations"
        )
    if problems:
        raise VerdictWithheld("; ".join(problems))
    return before, after


def _confidence(before: EquilibriumResult, after: EquilibriumResult) -> str:
    if before.loads_unique and after.loads_unique:
        return CONFIDENCE_CERTIFIED
    return CONFIDENCE_WITNESS_DEPENDENT


def detect_ibp(
    game: GameSpec, expansion: Expansion, options: SolverOptions | None = None
) -> ParadoxVerdict:
    """Does expanding the target type's information raise its own cost?"""
    opts = options or SolverOptions()
    _require_valid(game)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        expanded = expand_information(game, expansion)
    before, after = _solve_pair(game, expanded, opts)
    c0 = before.type_costs[expansion.target].value
    c1 = after.type_costs[expansion.target].value
    delta = c1 - c0
    return ParadoxVerdict(
        kind="IBP",
        before=before,
        after=after,
        delta=delta,
        occurred=delta > opts.compare_tolerance,
        confidence=_confidence(before, after),
        target=expansion.target,
    )


def detect_ibpsc(
    game: GameSpec, expansion: Expansion, options: SolverOptions | None = None
) -> ParadoxVerdict:
    """Does expanding the target type's information raise the social cost?"""
    opts = options or SolverOptions()
    _require_valid(game)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        expanded = expand_information(game, expansion)
    before, after = _solve_pair(game, expanded, opts)
    delta = after.social_cost - before.social_cost
    return ParadoxVerdict(
        kind="IBPSC",
        before=before,
        after=after,
        delta=delta,
        occurred=delta > opts.compare_tolerance,
        confidence=_confidence(before, after),
        target=expansion.target,
    )


def _pointwise_leq(new: CostFunction, old: CostFunction) -> bool:
    # big-M stands in for an impassable edge: anything may undercut it,
    # nothing finite may be raised to it.
    if old.big_m is not None:
        return True
    if new.big_m is not None:
        return False
    a, b = list(new.coeffs), list(old.coeffs)
    n = max(len(a), len(b))
    a += [0.0] * (n - len(a))
    b += [0.0] * (n - len(b))
    return all(x <= y + 1e-15 for x, y in zip(a, b))


def detect_bp(
    game: GameSpec,
    modified_costs: Mapping[EdgeId, CostFunction] | None = None,
    modified_demands: Mapping[TypeKey, float] | None = None,
    options: SolverOptions | None = None,
) -> ParadoxVerdict:
    """Does a pointwise cost/demand reduction raise the social cost?

    ``modified_costs`` and ``modified_demands`` override the originals and
    must dominate them downward (coefficient-wise for polynomials, big-M
    edges may drop to anything finite).
    """
    opts = options or SolverOptions()
    _require_valid(game)
    modified_costs = dict(modified_costs or {})
    modified_demands = {tuple(k): float(v) for k, v in (modified_demands or {}).items()}

    for eid, fn in sorted(modified_costs.items()):
        if eid not in game.costs:
            raise GameError(f"modified cost for unknown edge {eid!r}")
        if not _pointwise_leq(fn, game.cost(eid)):
            raise DominanceError(
                f"modified cost of edge {eid!r} is not a pointwise reduction"
            )
    for key, d in sorted(modified_demands.items()):
        old = game.info_type(key).demand
        if d < 0.0 or d > old + 1e-15:
            raise DominanceError(
                f"modified demand of type {key} must lie in [0, {old}]"
            )

    new_costs = dict(game.costs)
    new_costs.update(modified_costs)
    new_types = tuple(
        replace(t, demand=modified_demands.get(t.key, t.demand)) for t in game.types
    )
    modified = replace(game, costs=new_costs, types=new_types)

    before, after = _solve_pair(game, modified, opts)
    delta = after.social_cost - before.social_cost
    return ParadoxVerdict(
        kind="BP",
        before=before,
        after=after,
        delta=delta,
        occurred=delta > opts.compare_tolerance,
        confidence=_confidence(before, after),
    )


def check_not_all_worse(
    game: GameSpec, expansion: Expansion, options: SolverOptions | None = None
) -> NotAllWorseReport:
    """On a circuit game, verify some type is not hurt by the expansion.

    Only claimed for circuit games, so anything else is a precondition
    error.  Returns all per-type cost deltas alongside the verdict.
    """
    from .topology import is_circuit_game

    opts = options or SolverOptions()
    report = is_circuit_game(game)
    if not report.is_circuit_game:
        raise GameError(f"not a circuit game: {report.reason}")
    _require_valid(game)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        expanded = expand_information(game, expansion)
    before, after = _solve_pair(game, expanded, opts)
    deltas = {
        key: after.type_costs[key].value - before.type_costs[key].value
        for key in before.type_costs
    }
    ok = any(d <= opts.compare_tolerance for d in deltas.values())
    return NotAllWorseReport(ok=ok, deltas=deltas, before=before, after=after)


def _require_valid(game: GameSpec) -> None:
    violations = validate_game(game)
    if violations:
        raise GameError("invalid game: " + "; ".join(str(v) for v in violations))


# ---------------------------------------------------------------------------
# randomized witness search


@dataclass(frozen=True)
class Witness:
    """A sampled instance whose paradox verdict fired, replayable as-is."""

    index: int
    kind: str
    document: Mapping[str, object]
    occurred: bool
    confidence: str
    delta: float
    sc_before: float
    sc_after: float
    target_cost_before: float | None
    target_cost_after: float | None


@dataclass
class SearchResult:
    family: str
    kind: str
    seed: int
    budget: int
    samples: int
    withheld: int
    witnesses: list[Witness]


def search_paradox(
    family: str,
    kind: str,
    budget: int,
    seed: int,
    options: SolverOptions | None = None,
) -> SearchResult:
    """Deterministic seeded sampling of a family, collecting paradox hits.

    Every sample index derives its own counter-keyed random stream, so the
    result is independent of evaluation order.  Samples whose solves do not
    converge are counted as withheld; an empty witness list is informative,
    not an error.
    """
    from . import families, serialize

    opts = options or SolverOptions()
    if kind not in ("IBP", "IBPSC", "BP"):
        raise GameError(f"unknown paradox kind {kind!r}")
    witnesses: list[Witness] = []
    withheld = 0
    for index in range(budget):
        sample = families.sample_instance(family, seed, index)
        try:
            if kind == "BP":
                if sample.modified_costs is None:
                    raise GameError(
                        f"family {family!r} provides no cost modification for BP"
                    )
                verdict = detect_bp(
                    sample.game, sample.modified_costs, sample.modified_demands, opts
                )
            else:
                if sample.expansion is None:
                    raise GameError(
                        f"family {family!r} provides no expansion for {kind}"
                    )
                detector = detect_ibp if kind == "IBP" else detect_ibpsc
                verdict = detector(sample.game, sample.expansion, opts)
        except VerdictWithheld:
            withheld += 1
            continue
        if not verdict.occurred:
            continue
        document = serialize.document_to_dict(
            sample.game,
            expansion=sample.expansion,
            modified_costs=sample.modified_costs,
            modified_demands=sample.modified_demands,
        )
        tgt = verdict.target
        witnesses.append(
            Witness(
                index=index,
                kind=kind,
                document=document,
                occurred=True,
                confidence=verdict.confidence,
                delta=verdict.delta,
                sc_before=verdict.before.social_cost,
                sc_after=verdict.after.social_cost,
                target_cost_before=(
                    verdict.before.type_costs[tgt].value if tgt else None
                ),
                target_cost_after=(
                    verdict.after.type_costs[tgt].value if tgt else None
                ),
            )
        )
    return SearchResult(
        family=family,
        kind=kind,
        seed=seed,
        budget=budget,
        samples=budget,
        withheld=withheld,
        witnesses=witnesses,
    )


def replay_witness(
    document: Mapping[str, object], kind: str, options: SolverOptions | None = None
) -> ParadoxVerdict:
    """Re-run the detector on a serialized witness document."""
    from . import serialize

    loaded = serialize.document_from_dict(document)
    if kind == "BP":
        return detect_bp(loaded.game, loaded.modified_costs, loaded.modified_demands, options)
    if loaded.expansion is None:
        raise GameError("witness document carries no expansion block")
    detector = detect_ibp if kind == "IBP" else detect_ibpsc
    return detector(loaded.game, loaded.expansion, options)
