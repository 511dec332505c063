"""Reading and writing rule sets, host graphs, and analysis reports.

Rule sets travel in a line-oriented text format (the default) or an
equivalent JSON encoding selected by the ``.json`` file extension. The
text grammar, with ``#`` starting a comment and tokens separated by
whitespace::

    document   := statement*
    statement  := "algebra" NAME
                | "rule" NAME "{" rule-body "}"
                | "host" NAME "{" graph-body "}"
    rule-body  := section* ["formula" FORMULA]
    section    := ("lhs" | "interface" | "rhs") "{" element* "}"
    graph-body := element* ["formula" FORMULA]
    element    := "node" NAME
                | "edge" NAME ":" NAME NAME          # name : source target
                | "label" NAME ["=" INT]             # pin only in hosts
                | "attr" NAME ":" NAME NAME [TAG]    # name : node label tag
                | "eattr" NAME ":" NAME NAME [TAG]   # name : edge label tag

Each ``{`` sits on its keyword's line and each ``}`` on a line of its
own; a ``formula`` keyword takes the rest of its line in the formula
grammar. Omitted rule sections are empty graphs; an omitted formula is
``true``. Rule morphisms are implied by shared element names: the
interface must be a subgraph of both sides, and the three graphs must
declare the same labels.

Analysis results are carried by :class:`ReportDocument` and serialized
as JSON; conflict entries embed their minimal context as a ``host``
block in the text syntax above.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .conflicts import CLASSIFICATIONS, NCP_PAIR, PairReport
from .egraph import EGraph, EGraphError
from .formula import (
    TRUE,
    Formula,
    FormulaError,
    format_formula,
    parse_formula,
)
from .solver import SolverConfig
from .symbolic import Rule, SymbolicGraph, SymbolicGraphError, make_rule
from .version import VERSION

SECTIONS = ("lhs", "interface", "rhs")
ELEMENT_KEYWORDS = ("node", "edge", "label", "attr", "eattr")


class ParseError(ValueError):
    """A malformed document, positioned as ``source:line:column``."""

    def __init__(self, message: str, *, source: str, line: int, column: int):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.source = source
        self.line = line
        self.column = column
        self.reason = message


@dataclass(frozen=True)
class RuleSetDocument:
    """A parsed rule file: algebra, rules in order, named host graphs."""

    algebra: str = "integers"
    rules: tuple[Rule, ...] = ()
    hosts: Mapping[str, SymbolicGraph] = field(default_factory=dict)

    def rule(self, name: str) -> Rule:
        for rule in self.rules:
            if rule.name == name:
                return rule
        raise KeyError(f"no rule named {name!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, RuleSetDocument):
            return NotImplemented
        return (
            self.algebra == other.algebra
            and self.rules == other.rules
            and dict(self.hosts) == dict(other.hosts)
        )


# -- text parsing ---------------------------------------------------------------


@dataclass
class _Token:
    text: str
    line: int
    column: int


class _Reader:
    """Comment-stripped, tokenized lines with positions."""

    def __init__(self, text: str, source: str):
        self.source = source
        self.lines: list[tuple[int, list[_Token], str]] = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            body = raw.split("#", 1)[0]
            tokens = [
                _Token(m.group(), lineno, m.start() + 1)
                for m in re.finditer(r"\S+", body)
            ]
            if tokens:
                self.lines.append((lineno, tokens, body))
        self.index = 0

    def __bool__(self) -> bool:
        return self.index < len(self.lines)

    def take(self) -> tuple[int, list[_Token], str]:
        line = self.lines[self.index]
        self.index += 1
        return line

    def fail(self, message: str, line: int, column: int = 1) -> ParseError:
        return ParseError(message, source=self.source, line=line, column=column)


class _GraphBuilder:
    """Collects element declarations, then builds the E-graph at once."""

    def __init__(self, reader: _Reader, *, pins_allowed: bool):
        self.reader = reader
        self.pins_allowed = pins_allowed
        self.elements: dict[str, dict[str, tuple]] = {
            "node": {}, "edge": {}, "label": {}, "attr": {}, "eattr": {}
        }
        self.positions: dict[tuple[str, str], _Token] = {}
        self.pins: dict[str, int] = {}

    def add(self, tokens: list[_Token]) -> None:
        reader = self.reader
        keyword, name = tokens[0], tokens[1] if len(tokens) > 1 else None
        if name is None:
            raise reader.fail(f"{keyword.text} needs a name", keyword.line, keyword.column)
        kind = keyword.text
        if name.text in self.elements[kind]:
            raise reader.fail(f"duplicate {kind} {name.text!r}", name.line, name.column)
        rest = tokens[2:]
        if kind == "node":
            payload = ()
        elif kind == "label":
            payload = ()
            if rest:
                if not self.pins_allowed:
                    raise reader.fail(
                        "label pins are only allowed in host blocks",
                        rest[0].line, rest[0].column,
                    )
                if len(rest) != 2 or rest[0].text != "=":
                    raise reader.fail(
                        "expected '= INT' after the label name",
                        rest[0].line, rest[0].column,
                    )
                try:
                    self.pins[name.text] = int(rest[1].text)
                except ValueError:
                    raise reader.fail(
                        f"pin value {rest[1].text!r} is not an integer",
                        rest[1].line, rest[1].column,
                    ) from None
                rest = []
        elif kind == "edge":
            if len(rest) != 3 or rest[0].text != ":":
                raise reader.fail(
                    "expected ': SOURCE TARGET' after the edge name",
                    name.line, name.column,
                )
            payload = (rest[1].text, rest[2].text)
            rest = []
        else:  # attr / eattr
            if len(rest) not in (3, 4) or rest[0].text != ":":
                raise reader.fail(
                    f"expected ': CARRIER LABEL [TAG]' after the {kind} name",
                    name.line, name.column,
                )
            tag = rest[3].text if len(rest) == 4 else None
            payload = (rest[1].text, rest[2].text, tag)
            rest = []
        if rest:
            raise reader.fail(
                f"unexpected token {rest[0].text!r}", rest[0].line, rest[0].column
            )
        self.elements[kind][name.text] = payload
        self.positions[(kind, name.text)] = name

    def _check_reference(self, kind: str, name: str, ref_kind: str, ref: str) -> None:
        if ref not in self.elements[ref_kind]:
            token = self.positions[(kind, name)]
            raise self.reader.fail(
                f"{kind} {name!r} references unknown {ref_kind} {ref!r}",
                token.line, token.column,
            )

    def build(self, closing_line: int) -> EGraph:
        for name, (src, tgt) in self.elements["edge"].items():
            self._check_reference("edge", name, "node", src)
            self._check_reference("edge", name, "node", tgt)
        for kind, carrier_kind in (("attr", "node"), ("eattr", "edge")):
            for name, (carrier, label, _tag) in self.elements[kind].items():
                self._check_reference(kind, name, carrier_kind, carrier)
                self._check_reference(kind, name, "label", label)
        try:
            return EGraph(
                nodes=sorted(self.elements["node"]),
                edges=dict(sorted(self.elements["edge"].items())),
                label_nodes=sorted(self.elements["label"]),
                node_labels=dict(sorted(self.elements["attr"].items())),
                edge_labels=dict(sorted(self.elements["eattr"].items())),
            )
        except EGraphError as exc:  # pragma: no cover - references checked above
            raise self.reader.fail(str(exc), closing_line)


def _parse_formula_line(reader: _Reader, tokens: list[_Token], body: str) -> Formula:
    keyword = tokens[0]
    start = keyword.column - 1 + len("formula")
    text = body[start:]
    if not text.strip():
        raise reader.fail("formula keyword without a formula", keyword.line, keyword.column)
    try:
        return parse_formula(text)
    except FormulaError as exc:
        offset = getattr(exc, "position", 0)
        message = getattr(exc, "message", str(exc))
        raise reader.fail(
            f"bad formula: {message}", keyword.line, start + offset + 1
        ) from None


def _expect_block_open(reader: _Reader, tokens: list[_Token], what: str) -> None:
    if len(tokens) != 2 or tokens[1].text != "{":
        tail = tokens[-1]
        raise reader.fail(f"expected '{{' to open the {what}", tail.line, tail.column)


def _parse_graph_block(
    reader: _Reader, *, pins_allowed: bool, formula_allowed: bool
) -> tuple[EGraph, Formula | None, dict[str, int]]:
    builder = _GraphBuilder(reader, pins_allowed=pins_allowed)
    formula: Formula | None = None
    while True:
        if not reader:
            last = reader.lines[-1][0] if reader.lines else 1
            raise reader.fail("unexpected end of file inside a block", last)
        lineno, tokens, body = reader.take()
        head = tokens[0]
        if head.text == "}":
            if len(tokens) > 1:
                raise reader.fail(
                    f"unexpected token {tokens[1].text!r} after '}}'",
                    tokens[1].line, tokens[1].column,
                )
            return builder.build(lineno), formula, builder.pins
        if head.text in ELEMENT_KEYWORDS:
            builder.add(tokens)
        elif head.text == "formula" and formula_allowed:
            if formula is not None:
                raise reader.fail("duplicate formula line", head.line, head.column)
            formula = _parse_formula_line(reader, tokens, body)
        else:
            raise reader.fail(
                f"unexpected keyword {head.text!r} in a graph block",
                head.line, head.column,
            )


def _parse_rule_block(reader: _Reader, name_token: _Token) -> Rule:
    sections: dict[str, EGraph] = {}
    formula: Formula | None = None
    while True:
        if not reader:
            raise reader.fail("unexpected end of file inside a rule", name_token.line)
        lineno, tokens, body = reader.take()
        head = tokens[0]
        if head.text == "}":
            break
        if head.text in SECTIONS:
            if head.text in sections:
                raise reader.fail(
                    f"duplicate section {head.text!r}", head.line, head.column
                )
            _expect_block_open(reader, tokens, f"{head.text} section")
            graph, _, _ = _parse_graph_block(
                reader, pins_allowed=False, formula_allowed=False
            )
            sections[head.text] = graph
        elif head.text == "formula":
            if formula is not None:
                raise reader.fail("duplicate formula line", head.line, head.column)
            formula = _parse_formula_line(reader, tokens, body)
        else:
            raise reader.fail(
                f"unexpected keyword {head.text!r} in a rule block",
                head.line, head.column,
            )
    empty = EGraph()
    try:
        return make_rule(
            name_token.text,
            sections.get("lhs", empty),
            sections.get("interface", empty),
            sections.get("rhs", empty),
            formula if formula is not None else TRUE,
        )
    except (EGraphError, SymbolicGraphError) as exc:
        raise reader.fail(str(exc), name_token.line, name_token.column) from None


def parse_ruleset(text: str, source: str = "<string>") -> RuleSetDocument:
    """Parse the text format; errors carry source, line and column."""
    reader = _Reader(text, source)
    algebra: str | None = None
    rules: list[Rule] = []
    rule_names: set[str] = set()
    hosts: dict[str, SymbolicGraph] = {}
    while reader:
        lineno, tokens, body = reader.take()
        head = tokens[0]
        if head.text == "algebra":
            if len(tokens) != 2:
                raise reader.fail("expected 'algebra NAME'", head.line, head.column)
            if algebra is not None:
                raise reader.fail("duplicate algebra declaration", head.line, head.column)
            if tokens[1].text != "integers":
                raise reader.fail(
                    f"unsupported algebra {tokens[1].text!r} (only 'integers')",
                    tokens[1].line, tokens[1].column,
                )
            algebra = tokens[1].text
        elif head.text in ("rule", "host"):
            if len(tokens) != 3 or tokens[2].text != "{":
                raise reader.fail(
                    f"expected '{head.text} NAME {{'", head.line, head.column
                )
            name_token = tokens[1]
            taken = rule_names if head.text == "rule" else hosts
            if name_token.text in taken:
                raise reader.fail(
                    f"duplicate {head.text} {name_token.text!r}",
                    name_token.line, name_token.column,
                )
            if head.text == "rule":
                rules.append(_parse_rule_block(reader, name_token))
                rule_names.add(name_token.text)
            else:
                graph, formula, pins = _parse_graph_block(
                    reader, pins_allowed=True, formula_allowed=True
                )
                try:
                    hosts[name_token.text] = SymbolicGraph(
                        egraph=graph,
                        formula=formula if formula is not None else TRUE,
                        constants=pins,
                    )
                except (EGraphError, SymbolicGraphError) as exc:
                    raise reader.fail(
                        str(exc), name_token.line, name_token.column
                    ) from None
        else:
            raise reader.fail(
                f"expected 'algebra', 'rule' or 'host', got {head.text!r}",
                head.line, head.column,
            )
    return RuleSetDocument(
        algebra=algebra if algebra is not None else "integers",
        rules=tuple(rules),
        hosts=hosts,
    )


# -- text writing ---------------------------------------------------------------


def _element_lines(graph: EGraph, pins: Mapping[str, int] = {}) -> Iterator[str]:
    for node in sorted(graph.nodes):
        yield f"node {node}"
    for name, (src, tgt) in sorted(graph.edges.items()):
        yield f"edge {name} : {src} {tgt}"
    for label in sorted(graph.label_nodes):
        if label in pins:
            yield f"label {label} = {pins[label]}"
        else:
            yield f"label {label}"
    for keyword, entries in (("attr", graph.node_labels), ("eattr", graph.edge_labels)):
        for name, (carrier, label, tag) in sorted(entries.items()):
            suffix = f" {tag}" if tag is not None else ""
            yield f"{keyword} {name} : {carrier} {label}{suffix}"


def format_host(name: str, host: SymbolicGraph, indent: str = "") -> str:
    lines = [f"{indent}host {name} {{"]
    lines += [
        f"{indent}  {line}" for line in _element_lines(host.egraph, host.constants)
    ]
    lines.append(f"{indent}  formula {format_formula(host.formula)}")
    lines.append(f"{indent}}}")
    return "\n".join(lines)


def _format_rule(rule: Rule) -> str:
    lines = [f"rule {rule.name} {{"]
    for section, graph in (
        ("lhs", rule.lhs), ("interface", rule.interface), ("rhs", rule.rhs)
    ):
        lines.append(f"  {section} {{")
        lines += [f"    {line}" for line in _element_lines(graph)]
        lines.append("  }")
    lines.append(f"  formula {format_formula(rule.formula)}")
    lines.append("}")
    return "\n".join(lines)


def format_ruleset(doc: RuleSetDocument) -> str:
    """Canonical text form; ``parse_ruleset`` inverts it exactly."""
    parts = [f"algebra {doc.algebra}"]
    parts += [_format_rule(rule) for rule in doc.rules]
    parts += [format_host(name, host) for name, host in doc.hosts.items()]
    return "\n\n".join(parts) + "\n"


# -- JSON encoding ----------------------------------------------------------------


def _graph_to_data(graph: EGraph) -> dict:
    return {
        "nodes": sorted(graph.nodes),
        "edges": {name: list(ends) for name, ends in sorted(graph.edges.items())},
        "labels": sorted(graph.label_nodes),
        "attrs": {
            name: list(entry) for name, entry in sorted(graph.node_labels.items())
        },
        "eattrs": {
            name: list(entry) for name, entry in sorted(graph.edge_labels.items())
        },
    }


class _Shape:
    """Typed access into decoded JSON with pathed error messages."""

    def __init__(self, source: str):
        self.source = source

    def fail(self, path: str, message: str) -> ParseError:
        return ParseError(f"{path}: {message}", source=self.source, line=1, column=1)

    def mapping(self, value, path: str) -> dict:
        if not isinstance(value, dict):
            raise self.fail(path, "expected an object")
        return value

    def array(self, value, path: str) -> list:
        if not isinstance(value, list):
            raise self.fail(path, "expected an array")
        return value

    def string(self, value, path: str) -> str:
        if not isinstance(value, str):
            raise self.fail(path, "expected a string")
        return value

    def graph(self, value, path: str) -> EGraph:
        data = self.mapping(value, path)
        nodes = [self.string(n, f"{path}.nodes") for n in self.array(data.get("nodes", []), f"{path}.nodes")]
        edges = {}
        for name, ends in self.mapping(data.get("edges", {}), f"{path}.edges").items():
            pair = self.array(ends, f"{path}.edges.{name}")
            if len(pair) != 2:
                raise self.fail(f"{path}.edges.{name}", "expected [source, target]")
            edges[name] = (self.string(pair[0], path), self.string(pair[1], path))
        labels = [self.string(n, f"{path}.labels") for n in self.array(data.get("labels", []), f"{path}.labels")]
        attrs = {}
        eattrs = {}
        for key, out in (("attrs", attrs), ("eattrs", eattrs)):
            for name, entry in self.mapping(data.get(key, {}), f"{path}.{key}").items():
                triple = self.array(entry, f"{path}.{key}.{name}")
                if len(triple) != 3:
                    raise self.fail(f"{path}.{key}.{name}", "expected [carrier, label, tag]")
                tag = triple[2]
                if tag is not None and not isinstance(tag, str):
                    raise self.fail(f"{path}.{key}.{name}", "tag must be a string or null")
                out[name] = (self.string(triple[0], path), self.string(triple[1], path), tag)
        try:
            return EGraph(
                nodes=nodes, edges=edges, label_nodes=labels,
                node_labels=attrs, edge_labels=eattrs,
            )
        except EGraphError as exc:
            raise self.fail(path, str(exc)) from None

    def formula(self, value, path: str) -> Formula:
        text = self.string(value, path)
        try:
            return parse_formula(text)
        except FormulaError as exc:
            raise self.fail(path, f"bad formula: {exc}") from None


def ruleset_to_data(doc: RuleSetDocument) -> dict:
    """Plain-data (JSON-ready) form of a rule set."""
    return {
        "algebra": doc.algebra,
        "rules": [
            {
                "name": rule.name,
                "lhs": _graph_to_data(rule.lhs),
                "interface": _graph_to_data(rule.interface),
                "rhs": _graph_to_data(rule.rhs),
                "formula": format_formula(rule.formula),
            }
            for rule in doc.rules
        ],
        "hosts": [
            {
                "name": name,
                "graph": _graph_to_data(host.egraph),
                "pins": dict(sorted(host.constants.items())),
                "formula": format_formula(host.formula),
            }
            for name, host in doc.hosts.items()
        ],
    }


def ruleset_from_data(data: object, source: str = "<data>") -> RuleSetDocument:
    shape = _Shape(source)
    root = shape.mapping(data, "$")
    algebra = root.get("algebra", "integers")
    if algebra != "integers":
        raise shape.fail("$.algebra", f"unsupported algebra {algebra!r} (only 'integers')")
    rules = []
    names: set[str] = set()
    for index, entry in enumerate(shape.array(root.get("rules", []), "$.rules")):
        path = f"$.rules[{index}]"
        record = shape.mapping(entry, path)
        name = shape.string(record.get("name"), f"{path}.name")
        if name in names:
            raise shape.fail(f"{path}.name", f"duplicate rule {name!r}")
        names.add(name)
        try:
            rules.append(
                make_rule(
                    name,
                    shape.graph(record.get("lhs", {}), f"{path}.lhs"),
                    shape.graph(record.get("interface", {}), f"{path}.interface"),
                    shape.graph(record.get("rhs", {}), f"{path}.rhs"),
                    shape.formula(record.get("formula", "true"), f"{path}.formula"),
                )
            )
        except (EGraphError, SymbolicGraphError) as exc:
            raise shape.fail(path, str(exc)) from None
    hosts: dict[str, SymbolicGraph] = {}
    for index, entry in enumerate(shape.array(root.get("hosts", []), "$.hosts")):
        path = f"$.hosts[{index}]"
        record = shape.mapping(entry, path)
        name = shape.string(record.get("name"), f"{path}.name")
        if name in hosts:
            raise shape.fail(f"{path}.name", f"duplicate host {name!r}")
        pins = {}
        for label, value in shape.mapping(record.get("pins", {}), f"{path}.pins").items():
            if not isinstance(value, int) or isinstance(value, bool):
                raise shape.fail(f"{path}.pins.{label}", "pin values must be integers")
            pins[label] = value
        try:
            hosts[name] = SymbolicGraph(
                egraph=shape.graph(record.get("graph", {}), f"{path}.graph"),
                formula=shape.formula(record.get("formula", "true"), f"{path}.formula"),
                constants=pins,
            )
        except (EGraphError, SymbolicGraphError) as exc:
            raise shape.fail(path, str(exc)) from None
    return RuleSetDocument(algebra="integers", rules=tuple(rules), hosts=hosts)


def parse_ruleset_json(text: str, source: str = "<string>") -> RuleSetDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"bad JSON: {exc.msg}", source=source, line=exc.lineno, column=exc.colno
        ) from None
    return ruleset_from_data(data, source)


def format_ruleset_json(doc: RuleSetDocument) -> str:
    return json.dumps(ruleset_to_data(doc), indent=2, sort_keys=True) + "\n"


def load_ruleset(path: str | Path) -> RuleSetDocument:
    """Read a rule file, picking the encoding from the extension."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return parse_ruleset_json(text, str(path))
    return parse_ruleset(text, str(path))


# -- analysis reports --------------------------------------------------------------


@dataclass(frozen=True)
class ReportDocument:
    """Serializable outcome of an analyze run.

    ``pairs`` holds one plain-data record per ordered rule pair;
    ``timing`` stays ``null`` unless requested, keeping default reports
    byte-stable across runs.
    """

    tool: str
    solver: Mapping[str, object]
    mode: str
    pairs: tuple[Mapping[str, object], ...]
    summary: Mapping[str, object]
    timing: Mapping[str, object] | None = None

    @property
    def conflicting(self) -> bool:
        return bool(self.summary.get("conflicting_pairs", 0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReportDocument):
            return NotImplemented
        return report_to_data(self) == report_to_data(other)


def _entry_data(entry) -> dict:
    data: dict[str, object] = {
        "classification": entry.classification,
        "merged": [list(item) for item in entry.candidate.merged],
        "indeterminate": entry.indeterminate,
    }
    if entry.dependence is not None:
        data["first_blocked"] = [list(e) for e in entry.dependence.first_blocked]
        data["second_blocked"] = [list(e) for e in entry.dependence.second_blocked]
    if entry.confluence is not None:
        data["first_closers"] = entry.confluence.first_closers
        data["second_closers"] = entry.confluence.second_closers
    if entry.classification == NCP_PAIR:
        data["context"] = format_host("minimal_context", entry.candidate.sk)
    return data


def report_from_pairs(
    reports: Sequence[PairReport],
    *,
    config: SolverConfig,
    mode: str,
    timing: Mapping[str, object] | None = None,
) -> ReportDocument:
    pairs = tuple(
        {
            "first": report.first,
            "second": report.second,
            "verdict": report.verdict,
            "gluing_skipped": report.gluing_skipped,
            "indeterminate": any(entry.indeterminate for entry in report.entries),
            "solver_stats": dict(report.solver_stats),
            "entries": [_entry_data(entry) for entry in report.entries],
        }
        for report in reports
    )
    return ReportDocument(
        tool=f"sygra {VERSION}",
        solver={
            "backend": config.backend,
            "smt_command": config.smt_command,
            "timeout_ms": config.timeout_ms,
            "dnf_limit": config.dnf_limit,
        },
        mode=mode,
        pairs=pairs,
        summary={
            "pairs": len(pairs),
            "conflicting_pairs": sum(1 for p in pairs if p["verdict"] == "conflicting"),
        },
        timing=timing,
    )


def report_to_data(doc: ReportDocument) -> dict:
    return {
        "tool": doc.tool,
        "solver": dict(doc.solver),
        "mode": doc.mode,
        "pairs": [dict(pair) for pair in doc.pairs],
        "summary": dict(doc.summary),
        "timing": None if doc.timing is None else dict(doc.timing),
    }


def report_to_json(doc: ReportDocument) -> str:
    return json.dumps(report_to_data(doc), indent=2, sort_keys=True) + "\n"


def report_from_data(data: object, source: str = "<data>") -> ReportDocument:
    shape = _Shape(source)
    root = shape.mapping(data, "$")
    pairs = []
    for index, entry in enumerate(shape.array(root.get("pairs", []), "$.pairs")):
        record = shape.mapping(entry, f"$.pairs[{index}]")
        for j, item in enumerate(
            shape.array(record.get("entries", []), f"$.pairs[{index}].entries")
        ):
            classification = shape.mapping(
                item, f"$.pairs[{index}].entries[{j}]"
            ).get("classification")
            if classification not in CLASSIFICATIONS:
                raise shape.fail(
                    f"$.pairs[{index}].entries[{j}].classification",
                    f"unknown classification {classification!r}",
                )
        pairs.append(record)
    timing = root.get("timing")
    return ReportDocument(
        tool=shape.string(root.get("tool", ""), "$.tool"),
        solver=shape.mapping(root.get("solver", {}), "$.solver"),
        mode=shape.string(root.get("mode", ""), "$.mode"),
        pairs=tuple(pairs),
        summary=shape.mapping(root.get("summary", {}), "$.summary"),
        timing=None if timing is None else shape.mapping(timing, "$.timing"),
    )


def report_from_json(text: str, source: str = "<string>") -> ReportDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"bad JSON: {exc.msg}", source=source, line=exc.lineno, column=exc.colno
        ) from None
    return report_from_data(data, source)
