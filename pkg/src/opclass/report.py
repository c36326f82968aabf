"""Report documents: assembly, schema validation, JSON and Markdown rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import __version__
from .schemas import REPORT_SCHEMA, SCHEMA_VERSION, validate
from .verdicts import ClassVerdict, jsonable


@dataclass
class ClassReportDocument:
    command: str
    input: dict
    tolerances: dict
    verdicts: Sequence[ClassVerdict]
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool": "opclass",
            "tool_version": __version__,
            "command": self.command,
            "input": jsonable(self.input),
            "tolerances": {k: float(v) for k, v in self.tolerances.items()},
            "verdicts": [v.to_dict() for v in self.verdicts],
            "extras": jsonable(self.extras),
        }

    def to_json(self) -> str:
        doc = self.to_dict()
        validate(doc, REPORT_SCHEMA)
        return dumps(doc)

    def to_markdown(self) -> str:
        return render_markdown(self.to_dict())


def dumps(doc: Any) -> str:
    """Canonical serialization: sorted keys, fixed separators, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _mark(holds: bool) -> str:
    return "yes" if holds else "no"


def _fmt(x: Any) -> str:
    if isinstance(x, float):
        return f"{x:.3e}"
    return str(x)


def render_markdown(doc: dict) -> str:
    lines = [f"# opclass {doc['command']}", ""]
    tol = ", ".join(f"{k}={_fmt(v)}" for k, v in sorted(doc["tolerances"].items()))
    lines += [f"tolerances: {tol}", "", "| class | holds | residual | note |",
              "|---|---|---|---|"]
    for v in doc["verdicts"]:
        lines.append(f"| {v['class_name']} | {_mark(v['holds'])} | {_fmt(v['residual'])} "
                     f"| {v.get('note', '')} |")
    extras = doc.get("extras") or {}
    if extras:
        lines += ["", "## details", ""]
        for k in sorted(extras):
            lines.append(f"- {k}: {json.dumps(extras[k], sort_keys=True)}")
    return "\n".join(lines) + "\n"
