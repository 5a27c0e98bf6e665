"""On-disk game format, DOT/CSV exports.

The document format is plain JSON with an explicit schema version so that
search witnesses stay human-diffable and replayable.  Parsing reports the
offending field path with every error.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Any, Mapping, Sequence

from .game_core import (
    DEFAULT_BIG_M,
    CostFunction,
    EdgeId,
    GameError,
    GameSpec,
    InfoType,
    Network,
    Population,
    TypeKey,
    validate_game,
)
from .paradox import Expansion

SCHEMA_VERSION = 1


class GameFormatError(GameError):
    """Malformed or semantically invalid game document."""


# ---------------------------------------------------------------------------
# JSON document


def _cost_to_dict(fn: CostFunction) -> dict[str, Any]:
    if fn.big_m is not None:
        return {"kind": "big_m", "value": fn.big_m}
    return {"kind": "polynomial", "coeffs": list(fn.coeffs)}


def _cost_from_dict(doc: Any, where: str, big_m_default: float) -> CostFunction:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise GameFormatError(f"{where}: expected a cost object with a 'kind'")
    kind = doc["kind"]
    try:
        if kind == "polynomial":
            coeffs = doc.get("coeffs")
            if not isinstance(coeffs, list):
                raise GameFormatError(f"{where}.coeffs: expected a list")
            return CostFunction.polynomial(coeffs)
        if kind == "big_m":
            return CostFunction.impassable(float(doc.get("value", big_m_default)))
    except GameError as exc:
        raise GameFormatError(f"{where}: {exc}") from None
    raise GameFormatError(f"{where}.kind: unknown cost kind {kind!r}")


def game_to_dict(game: GameSpec) -> dict[str, Any]:
    """Deterministic JSON-ready representation of a game."""
    return {
        "schema_version": SCHEMA_VERSION,
        "nodes": sorted(game.network.nodes),
        "edges": [
            {
                "id": e.id,
                "a": e.a,
                "b": e.b,
                "cost": _cost_to_dict(game.cost(e.id))
                if e.id in game.costs
                else None,
            }
            for e in game.network.edges
        ],
        "populations": [
            {
                "id": p.id,
                "origin": p.origin,
                "destination": p.destination,
                "edges": sorted(p.relevant_edges),
            }
            for p in game.populations
        ],
        "types": [
            {
                "population": t.population,
                "index": t.index,
                "known_edges": sorted(t.known_edges),
                "demand": t.demand,
            }
            for t in game.types
        ],
    }


def _expect(doc: Mapping, key: str, kind, where: str):
    if key not in doc:
        raise GameFormatError(f"{where}.{key}: missing field")
    value = doc[key]
    if not isinstance(value, kind):
        names = (
            "/".join(k.__name__ for k in kind)
            if isinstance(kind, tuple)
            else kind.__name__
        )
        raise GameFormatError(
            f"{where}.{key}: expected {names}, got {type(value).__name__}"
        )
    return value


def game_from_dict(
    doc: Mapping[str, Any], big_m_default: float = DEFAULT_BIG_M
) -> GameSpec:
    """Parse a game document; errors carry the offending field path."""
    if not isinstance(doc, Mapping):
        raise GameFormatError("document: expected an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise GameFormatError(
            f"schema_version: expected {SCHEMA_VERSION}, got {version!r}"
        )
    nodes = _expect(doc, "nodes", list, "document")
    edges_doc = _expect(doc, "edges", list, "document")
    triples = []
    costs: dict[EdgeId, CostFunction] = {}
    for i, ed in enumerate(edges_doc):
        where = f"edges[{i}]"
        if not isinstance(ed, Mapping):
            raise GameFormatError(f"{where}: expected an object")
        eid = str(_expect(ed, "id", str, where))
        triples.append((eid, str(_expect(ed, "a", str, where)), str(_expect(ed, "b", str, where))))
        if ed.get("cost") is not None:
            costs[eid] = _cost_from_dict(ed["cost"], f"{where}.cost", big_m_default)
    try:
        network = Network.from_edges(triples, extra_nodes=[str(n) for n in nodes])
    except GameError as exc:
        raise GameFormatError(f"edges: {exc}") from None

    populations = []
    for i, pd in enumerate(_expect(doc, "populations", list, "document")):
        where = f"populations[{i}]"
        if not isinstance(pd, Mapping):
            raise GameFormatError(f"{where}: expected an object")
        populations.append(
            Population(
                id=str(_expect(pd, "id", str, where)),
                origin=str(_expect(pd, "origin", str, where)),
                destination=str(_expect(pd, "destination", str, where)),
                relevant_edges=frozenset(
                    str(e) for e in _expect(pd, "edges", list, where)
                ),
            )
        )
    types = []
    for i, td in enumerate(_expect(doc, "types", list, "document")):
        where = f"types[{i}]"
        if not isinstance(td, Mapping):
            raise GameFormatError(f"{where}: expected an object")
        demand = _expect(td, "demand", (int, float), where)
        types.append(
            InfoType(
                population=str(_expect(td, "population", str, where)),
                index=int(_expect(td, "index", int, where)),
                known_edges=frozenset(
                    str(e) for e in _expect(td, "known_edges", list, where)
                ),
                demand=float(demand),
            )
        )
    return GameSpec(network, tuple(populations), tuple(types), costs)


def expansion_to_dict(expansion: Expansion) -> dict[str, Any]:
    return {
        "population": expansion.target[0],
        "index": expansion.target[1],
        "added_edges": sorted(expansion.added_edges),
    }


def expansion_from_dict(doc: Mapping[str, Any]) -> Expansion:
    where = "expansion"
    return Expansion(
        target=(
            str(_expect(doc, "population", str, where)),
            int(_expect(doc, "index", int, where)),
        ),
        added_edges=frozenset(str(e) for e in _expect(doc, "added_edges", list, where)),
    )


def document_to_dict(
    game: GameSpec,
    expansion: Expansion | None = None,
    modified_costs: Mapping[EdgeId, CostFunction] | None = None,
    modified_demands: Mapping[TypeKey, float] | None = None,
) -> dict[str, Any]:
    """Game document plus optional expansion / modification blocks."""
    doc = game_to_dict(game)
    if expansion is not None:
        doc["expansion"] = expansion_to_dict(expansion)
    if modified_costs:
        doc["modified_costs"] = {
            eid: _cost_to_dict(fn) for eid, fn in sorted(modified_costs.items())
        }
    if modified_demands:
        doc["modified_demands"] = {
            f"{k[0]}:{k[1]}": float(v) for k, v in sorted(modified_demands.items())
        }
    return doc


@dataclass(frozen=True)
class LoadedDocument:
    game: GameSpec
    expansion: Expansion | None = None
    modified_costs: Mapping[EdgeId, CostFunction] | None = None
    modified_demands: Mapping[TypeKey, float] | None = None


def document_from_dict(
    doc: Mapping[str, Any], big_m_default: float = DEFAULT_BIG_M
) -> LoadedDocument:
    game = game_from_dict(doc, big_m_default=big_m_default)
    expansion = None
    if doc.get("expansion") is not None:
        expansion = expansion_from_dict(doc["expansion"])
    modified_costs = None
    if doc.get("modified_costs"):
        modified_costs = {
            str(eid): _cost_from_dict(cd, f"modified_costs[{eid}]", big_m_default)
            for eid, cd in doc["modified_costs"].items()
        }
    modified_demands = None
    if doc.get("modified_demands"):
        modified_demands = {}
        for key, v in doc["modified_demands"].items():
            pop, _, idx = str(key).rpartition(":")
            if not pop or not idx.lstrip("-").isdigit():
                raise GameFormatError(
                    f"modified_demands[{key}]: expected 'population:index' keys"
                )
            modified_demands[(pop, int(idx))] = float(v)
    return LoadedDocument(game, expansion, modified_costs, modified_demands)


def save_game(game: GameSpec, path: str | FsPath) -> None:
    FsPath(path).write_text(
        json.dumps(game_to_dict(game), indent=2, sort_keys=True) + "\n"
    )


def load_game(path: str | FsPath, big_m_default: float = DEFAULT_BIG_M) -> GameSpec:
    """Load and validate a game document; violations are fatal here."""
    return load_document(path, big_m_default=big_m_default).game


def load_document(
    path: str | FsPath, big_m_default: float = DEFAULT_BIG_M
) -> LoadedDocument:
    try:
        doc = json.loads(FsPath(path).read_text())
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    loaded = document_from_dict(doc, big_m_default=big_m_default)
    violations = validate_game(loaded.game)
    if violations:
        raise GameFormatError(
            f"{path}: invalid game: " + "; ".join(str(v) for v in violations)
        )
    return loaded


# ---------------------------------------------------------------------------
# exports


def _format_number(x: float) -> str:
    return f"{x:.12g}"


def _cost_label(fn: CostFunction) -> str:
    if fn.big_m is not None:
        return f"M({_format_number(fn.big_m)})"
    if not fn.coeffs:
        return "0"
    terms = []
    for j, c in enumerate(fn.coeffs):
        if c == 0.0 and len(fn.coeffs) > 1:
            continue
        if j == 0:
            terms.append(_format_number(c))
        elif j == 1:
            terms.append(f"{_format_number(c)}t" if c != 1.0 else "t")
        else:
            terms.append(f"{_format_number(c)}t^{j}" if c != 1.0 else f"t^{j}")
    return "+".join(terms) if terms else "0"


def export_dot(game: GameSpec, loads: Mapping[EdgeId, float] | None = None) -> str:
    """Deterministic DOT rendering; loads become edge labels when given."""
    lines = ["graph congestion_game {"]
    for node in sorted(game.network.nodes):
        lines.append(f'  "{node}";')
    for e in game.network.edges:
        label = f"{e.id}: {_cost_label(game.cost(e.id))}" if e.id in game.costs else e.id
        if loads is not None and e.id in loads:
            label += f" | load={_format_number(loads[e.id])}"
        lines.append(f'  "{e.a}" -- "{e.b}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_csv(
    rows: Sequence[Mapping[str, Any]], columns: Sequence[str] | None = None
) -> str:
    """Deterministic CSV; with no rows, the header alone is emitted."""
    if columns is None:
        cols: list[str] = []
        for row in rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
    else:
        cols = list(columns)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        out = []
        for col in cols:
            val = row.get(col, "")
            if isinstance(val, float):
                out.append(_format_number(val))
            else:
                out.append(val)
        writer.writerow(out)
    return buf.getvalue()


WITNESS_COLUMNS = (
    "index",
    "kind",
    "occurred",
    "confidence",
    "delta",
    "sc_before",
    "sc_after",
    "target_cost_before",
    "target_cost_after",
    "document",
)


def witness_rows(witnesses) -> list[dict[str, Any]]:
    rows = []
    for w in witnesses:
        rows.append(
            {
                "index": w.index,
                "kind": w.kind,
                "occurred": "yes" if w.occurred else "no",
                "confidence": w.confidence,
                "delta": w.delta,
                "sc_before": w.sc_before,
                "sc_after": w.sc_after,
                "target_cost_before": (
                    w.target_cost_before if w.target_cost_before is not None else ""
                ),
                "target_cost_after": (
                    w.target_cost_after if w.target_cost_after is not None else ""
                ),
                "document": json.dumps(w.document, sort_keys=True, separators=(",", ":")),
            }
        )
    return rows
