"""Command-line front end.

Exit codes: 0 = computed, 2 = a paradox occurred (scriptable), 1 = error.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass

import click

from . import families, paradox, scenarios, serialize, topology
from .equilibrium import EquilibriumResult, SolverOptions, solve_icue
from .game_core import DEFAULT_BIG_M, GameError, GameSpec
from .paradox import Expansion, ParadoxVerdict, VerdictWithheld


@dataclass
class _Ctx:
    options: SolverOptions
    seed: int


def _fmt(x: float) -> str:
    return f"{x:.9g}"


@click.group()
@click.option("--tol", type=float, default=1e-8, show_default=True,
              help="Relative equilibrium gap tolerance.")
@click.option("--max-iters", type=int, default=10_000, show_default=True,
              help="Solver iteration cap.")
@click.option("--big-m", type=float, default=DEFAULT_BIG_M, show_default=True,
              help="Finite stand-in for impassable edges.")
@click.option("--grid", type=int, default=6, show_default=True,
              help="Grid resolution of the brute-force oracle.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for randomized search.")
@click.pass_context
def cli(ctx, tol, max_iters, big_m, grid, seed):
    """Congestion games with heterogeneous information."""
    ctx.obj = _Ctx(
        options=SolverOptions(
            gap_tolerance=tol,
            max_iterations=max_iters,
            big_m=big_m,
            grid_resolution=grid,
            seed=seed,
        ),
        seed=seed,
    )


def _load(ctx, path) -> serialize.LoadedDocument:
    return serialize.load_document(path, big_m_default=ctx.obj.options.big_m)


def _print_solution(game: GameSpec, result: EquilibriumResult) -> None:
    click.echo(f"converged: {'yes' if result.converged else 'no'} "
               f"({result.iterations} iterations)")
    click.echo(f"relative gap: {_fmt(result.relative_gap)}")
    if not result.loads_unique:
        click.echo("note: loads possibly non-unique (non-strictly-increasing costs)")
    for key in sorted(result.type_costs):
        tc = result.type_costs[key]
        demand = game.info_type(key).demand
        click.echo(
            f"type {key[0]}:{key[1]} cost={_fmt(tc.value)} "
            f"gap={_fmt(result.gaps[key])} demand={_fmt(demand)}"
        )
    click.echo("loads:")
    for eid in sorted(result.loads):
        click.echo(f"  {eid}={_fmt(result.loads[eid])}")
    click.echo(f"social cost: {_fmt(result.social_cost)}")


def _print_verdict(verdict: ParadoxVerdict) -> int:
    click.echo(f"kind: {verdict.kind}")
    click.echo(f"social cost before: {_fmt(verdict.before.social_cost)}")
    click.echo(f"social cost after: {_fmt(verdict.after.social_cost)}")
    if verdict.target is not None:
        tb = verdict.before.type_costs[verdict.target].value
        ta = verdict.after.type_costs[verdict.target].value
        click.echo(f"target type {verdict.target[0]}:{verdict.target[1]} "
                   f"cost before: {_fmt(tb)}")
        click.echo(f"target type {verdict.target[0]}:{verdict.target[1]} "
                   f"cost after: {_fmt(ta)}")
    click.echo(f"delta: {_fmt(verdict.delta)}")
    click.echo(f"occurred: {'yes' if verdict.occurred else 'no'}")
    click.echo(f"confidence: {verdict.confidence}")
    return 2 if verdict.occurred else 0


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def classify(ctx, file):
    """Topology report and immunity certificate for a game file."""
    game = _load(ctx, file).game
    net = game.network
    click.echo(f"nodes: {len(net.nodes)}  edges: {len(net.edges)}")
    click.echo(f"simple: {'yes' if topology.is_simple(net) else 'no'}")
    click.echo(f"tree: {'yes' if topology.is_tree(net) else 'no'}")
    click.echo(f"ring: {'yes' if topology.is_ring(net) else 'no'}")
    for p in game.populations:
        li = topology.is_li(net, p.origin, p.destination, allowed=p.relevant_edges)
        sli = topology.is_sli(net, p.origin, p.destination, allowed=p.relevant_edges)
        pigou = topology.has_pigou_embedding(
            net.subnetwork(p.relevant_edges, keep_nodes={p.origin, p.destination}),
            p.origin, p.destination,
        )
        click.echo(
            f"population {p.id}: {p.origin}->{p.destination} "
            f"LI={'yes' if li.is_li else 'no'} "
            f"SLI={'yes' if sli.is_sli else 'no'} "
            f"blocks={len(sli.blocks)} "
            f"pigou_embedding={'yes' if pigou else 'no'}"
        )
    circuit = topology.is_circuit_game(game)
    line = f"circuit game: {'yes' if circuit.is_circuit_game else 'no'}"
    if circuit.reason:
        line += f" ({circuit.reason})"
    click.echo(line)
    cert = topology.immunity_certificate(game)
    click.echo(f"immunity: {cert.verdict.value}")
    for note in cert.notes:
        click.echo(f"  note: {note}")
    return 0


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def solve(ctx, file):
    """Solve a game file and print the equilibrium."""
    game = _load(ctx, file).game
    result = solve_icue(game, ctx.obj.options)
    _print_solution(game, result)
    return 0


def _expansion_from_flags(loaded, pop, type_index, edges):
    if pop is not None or type_index is not None or edges:
        if pop is None or type_index is None or not edges:
            raise GameError(
                "--pop, --type-index and --edges must be given together"
            )
        return Expansion(
            target=(pop, type_index),
            added_edges=frozenset(e for e in edges.split(",") if e),
        )
    if loaded.expansion is None:
        raise GameError(
            "no expansion: pass --pop/--type-index/--edges or embed an "
            "'expansion' block in the document"
        )
    return loaded.expansion


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--pop", default=None, help="Population id of the expanded type.")
@click.option("--type-index", type=int, default=None, help="Index of the expanded type.")
@click.option("--edges", default=None, help="Comma-separated edge ids to add.")
@click.pass_context
def ibp(ctx, file, pop, type_index, edges):
    """Does expanding one type's information raise its own cost?"""
    loaded = _load(ctx, file)
    expansion = _expansion_from_flags(loaded, pop, type_index, edges)
    verdict = paradox.detect_ibp(loaded.game, expansion, ctx.obj.options)
    return _print_verdict(verdict)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--pop", default=None, help="Population id of the expanded type.")
@click.option("--type-index", type=int, default=None, help="Index of the expanded type.")
@click.option("--edges", default=None, help="Comma-separated edge ids to add.")
@click.pass_context
def ibpsc(ctx, file, pop, type_index, edges):
    """Does expanding one type's information raise the social cost?"""
    loaded = _load(ctx, file)
    expansion = _expansion_from_flags(loaded, pop, type_index, edges)
    verdict = paradox.detect_ibpsc(loaded.game, expansion, ctx.obj.options)
    return _print_verdict(verdict)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.argument("modified", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def bp(ctx, file, modified):
    """Does the (reduced) modified game have a higher social cost?"""
    base = _load(ctx, file).game
    other = _load(ctx, modified).game
    modified_costs = {
        eid: other.cost(eid) for eid in other.costs
        if eid not in base.costs or other.cost(eid) != base.cost(eid)
    }
    modified_demands = {
        t.key: t.demand
        for t in other.types
        if base.info_type(t.key).demand != t.demand
    }
    verdict = paradox.detect_bp(base, modified_costs, modified_demands, ctx.obj.options)
    return _print_verdict(verdict)


@cli.command()
@click.option("--family", "family_name", required=True,
              type=click.Choice(families.family_names()),
              help="Instance generator family.")
@click.option("--kind", required=True, type=click.Choice(["IBP", "IBPSC", "BP"]))
@click.option("--budget", type=int, required=True, help="Number of samples.")
@click.option("--seed", "seed_override", type=int, default=None,
              help="Override the global seed for this search.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Also write the witness CSV to a file.")
@click.pass_context
def search(ctx, family_name, kind, budget, seed_override, out):
    """Sample a family and report every instance where the paradox fires."""
    seed = ctx.obj.seed if seed_override is None else seed_override
    result = paradox.search_paradox(family_name, kind, budget, seed, ctx.obj.options)
    text = serialize.export_csv(
        serialize.witness_rows(result.witnesses), columns=serialize.WITNESS_COLUMNS
    )
    click.echo(text, nl=False)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    click.echo(
        f"# samples={result.samples} witnesses={len(result.witnesses)} "
        f"withheld={result.withheld}",
        err=True,
    )
    return 2 if result.witnesses else 0


@cli.command()
@click.argument("scenario_id", type=click.Choice(scenarios.SCENARIO_IDS))
@click.option("--run", is_flag=True, help="Solve the scenario and run its detector.")
@click.pass_context
def scenario(ctx, scenario_id, run):
    """Show (and optionally run) a builtin scenario."""
    sc = scenarios.builtin_scenario(scenario_id, big_m=ctx.obj.options.big_m)
    click.echo(f"scenario: {sc.id}")
    click.echo(sc.description)
    if not run:
        click.echo(f"paradox kind: {sc.paradox_kind or 'none'}")
        return 0
    code = 0
    if sc.paradox_kind == "BP":
        verdict = paradox.detect_bp(sc.game, sc.modified_costs, None, ctx.obj.options)
        code = _print_verdict(verdict)
    elif sc.paradox_kind in ("IBP", "IBPSC"):
        detector = paradox.detect_ibp if sc.paradox_kind == "IBP" else paradox.detect_ibpsc
        verdict = detector(sc.game, sc.expansion, ctx.obj.options)
        code = _print_verdict(verdict)
        if sc.paradox_kind == "IBPSC":
            side = paradox.detect_ibp(sc.game, sc.expansion, ctx.obj.options)
            click.echo(f"ibp occurred: {'yes' if side.occurred else 'no'}")
    else:
        result = solve_icue(sc.game, ctx.obj.options)
        _print_solution(sc.game, result)
    cert = topology.immunity_certificate(sc.game)
    click.echo(f"immunity: {cert.verdict.value}")
    return code


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--dot", "fmt", flag_value="dot", default=True,
              help="Emit DOT (default).")
@click.option("--csv", "fmt", flag_value="csv", help="Emit a CSV summary.")
@click.option("--solved", is_flag=True, help="Solve first and include loads/costs.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def export(ctx, file, fmt, solved, out):
    """Export a game as DOT or a per-type CSV summary."""
    game = _load(ctx, file).game
    result = solve_icue(game, ctx.obj.options) if solved else None
    if fmt == "dot":
        text = serialize.export_dot(game, loads=result.loads if result else None)
    else:
        if result is not None:
            rows = [
                {
                    "population": key[0],
                    "type": key[1],
                    "demand": game.info_type(key).demand,
                    "cost": result.type_costs[key].value,
                    "gap": result.gaps[key],
                }
                for key in sorted(result.type_costs)
            ]
            cols = ["population", "type", "demand", "cost", "gap"]
        else:
            rows = [
                {"edge": e.id, "a": e.a, "b": e.b,
                 "cost": serialize._cost_label(game.cost(e.id))}
                for e in game.network.edges
            ]
            cols = ["edge", "a", "b", "cost"]
        text = serialize.export_csv(rows, columns=cols)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    return 0


def main(argv: list[str] | None = None) -> int:
    """Run the CLI, mapping errors to exit code 1 and verdicts to 0/2."""
    try:
        rv = cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except VerdictWithheld as exc:
        click.echo(f"verdict withheld: {exc}", err=True)
        return 1
    except GameError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return int(rv) if isinstance(rv, int) else 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
