"""Graphviz DOT and JSON export, plus JSON import."""

from __future__ import annotations

import json

from .model import Link, LoopClass, LoopDecl, Model, Polarity, Sector, VarKind, Variable


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(model: Model) -> str:
    """Render the model as a DOT digraph.

    One node per variable labelled ``id: name``, grouped into one cluster
    per sector.  Minus links are dashed with a "-" edge label; unknown
    links are dotted with "?".  Output order follows variable ids and
    link pairs, so equal models produce identical text.
    """
    lines = [f"digraph {_dot_quote(model.name)} {{"]
    lines.append("  rankdir=LR;")
    lines.append("  node [shape=box];")
    for sector in model.sectors:
        cluster = sector.id.replace("-", "_")
        lines.append(f"  subgraph cluster_{cluster} {{")
        lines.append(f"    label={_dot_quote(sector.name)};")
        for v in model.variables:
            if v.sector == sector.id:
                lines.append(f"    v{v.id} [label={_dot_quote(f'{v.id}: {v.name}')}];")
        lines.append("  }")
    for link in model.links:
        if link.polarity is Polarity.MINUS:
            attr = ' [style=dashed, label="-"]'
        elif link.polarity is Polarity.UNKNOWN:
            attr = ' [style=dotted, label="?"]'
        else:
            attr = ""
        lines.append(f"  v{link.source} -> v{link.target}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(model: Model) -> str:
    """Serialize to JSON with a fixed key order; see import_json."""
    doc = {
        "name": model.name,
        "sectors": [{"id": s.id, "name": s.name} for s in model.sectors],
        "variables": [
            {"id": v.id, "name": v.name, "sector": v.sector, "kind": v.kind.value}
            for v in model.variables
        ],
        "links": [
            {
                "source": l.source,
                "target": l.target,
                "polarity": l.polarity.value,
                "anchor": l.anchor,
            }
            for l in model.links
        ],
        "loops": [
            {"name": d.name, "class": d.kind.value, "sequence": list(d.sequence)}
            for d in model.loops
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _typed(value, kind, what):
    # bool is an int subclass; never acceptable where an id is expected
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ValueError(f"{what} must be {kind.__name__}, got {value!r}")
    return value


def import_json(text: str) -> Model:
    """Rebuild a model from export_json output.

    Raises ValueError on structural problems; extra keys are ignored so
    the format can grow.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValueError("top level must be an object")
    try:
        name = _typed(doc["name"], str, "model name")
        sectors = tuple(
            Sector(_typed(s["id"], str, "sector id"), _typed(s["name"], str, "sector name"))
            for s in doc["sectors"]
        )
        variables = tuple(
            Variable(
                _typed(v["id"], int, "variable id"),
                _typed(v["name"], str, "variable name"),
                _typed(v["sector"], str, "variable sector"),
                VarKind(v.get("kind", "stock")),
            )
            for v in doc["variables"]
        )
        links = tuple(
            Link(
                _typed(l["source"], int, "link source"),
                _typed(l["target"], int, "link target"),
                Polarity(l.get("polarity", "?")),
                l.get("anchor"),
            )
            for l in doc["links"]
        )
        loops = tuple(
            LoopDecl(
                _typed(d["name"], str, "loop name"),
                LoopClass(d["class"]),
                tuple(_typed(v, int, "loop sequence entry") for v in d["sequence"]),
            )
            for d in doc["loops"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed model document: {exc!r}") from None
    return Model(name=name, sectors=sectors, variables=variables, links=links, loops=loops)
