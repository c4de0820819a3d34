"""Text DSL for causal-loop models.

The format is line-oriented; ``#`` starts a comment anywhere outside a
quoted string, and whitespace within a line is not significant.  The five
directives are::

    model "<name>"
    sector <id> "<display name>"
    var <int> "<name>" sector <id> [kind stock|aux]
    link <int> -> <int> <+|-|?> ["<anchor>"]
    loop <name> <reinforcing|balancing> = <int> <int> ...

Directives may appear in any order; references are resolved after the
whole file is read.  Parsing never throws on bad input: every failure is
reported as a :class:`Diagnostic` with an exact source span, and a file
parses to a model only when there are no error diagnostics.  Unknown
``?`` polarities are legal and produce warnings (they are the input to the
sign solver).

Diagnostic codes form a closed set:

==================== ======== ===========================================
code                 severity meaning
==================== ======== ===========================================
SYNTAX               error    malformed line or missing model header
BAD_ID               error    variable id < 1
EMPTY_NAME           error    empty quoted name
DUPLICATE_SECTOR     error    sector id declared twice
DUPLICATE_VARIABLE   error    variable id declared twice
DUPLICATE_LINK       error    same (source, target) pair declared twice
DUPLICATE_LOOP_NAME  error    loop name declared twice
DUPLICATE_IN_SEQUENCE error   loop sequence repeats a variable id
LOOP_TOO_SHORT       error    loop sequence shorter than 2 ids
SELF_LOOP            error    link with source == target
UNKNOWN_SECTOR       error    var references an undeclared sector
UNKNOWN_VARIABLE     error    link or loop references an undeclared var
LOOP_EDGE_MISSING    error    loop implies a link that is not declared
UNKNOWN_POLARITY     warning  link polarity is '?'
==================== ======== ===========================================
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .model import (
    Link,
    LoopClass,
    LoopDecl,
    Model,
    Polarity,
    Sector,
    VarKind,
    Variable,
    cycle_edges,
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: SourceSpan

    def render(self) -> str:
        return (
            f"{self.severity.value}[{self.code}] "
            f"{self.span.line}:{self.span.column}: {self.message}"
        )


@dataclass
class ParseResult:
    model: Model | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.model is not None

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.WARNING]


# ---------------------------------------------------------------------------
# Tokenizer (shared with the scenario format)

@dataclass(frozen=True)
class Token:
    kind: str  # word | int | string | arrow | sign | eq | float
    text: str
    line: int
    column: int
    length: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, self.length)


_WORD_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_WORD_CONT = _WORD_START | set("0123456789-")


def _err(code: str, message: str, span: SourceSpan) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span)


def _warn(code: str, message: str, span: SourceSpan) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, span)


def scan_line(text: str, lineno: int, *, numbers: str = "int") -> tuple[list[Token], list[Diagnostic]]:
    """Tokenize one line.  ``numbers`` selects integer or float literals."""
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t":
            i += 1
            continue
        if c == "#":
            break
        col = i + 1
        if c == '"':
            value = []
            j = i + 1
            closed = False
            while j < n:
                ch = text[j]
                if ch == "\\" and j + 1 < n and text[j + 1] in ('"', "\\"):
                    value.append(text[j + 1])
                    j += 2
                    continue
                if ch == '"':
                    closed = True
                    j += 1
                    break
                value.append(ch)
                j += 1
            if not closed:
                diags.append(
                    _err("SYNTAX", "unterminated string", SourceSpan(lineno, col, n - i))
                )
                return [], diags
            tokens.append(Token("string", "".join(value), lineno, col, j - i))
            i = j
            continue
        if c == "-" and i + 1 < n and text[i + 1] == ">":
            tokens.append(Token("arrow", "->", lineno, col, 2))
            i += 2
            continue
        if numbers == "float" and (c.isdigit() or (c in "+-." and i + 1 < n and (text[i + 1].isdigit() or text[i + 1] == "."))):
            j = i + 1 if c in "+-" else i
            k = j
            while k < n and (text[k].isdigit() or text[k] in ".eE" or (text[k] in "+-" and k > j and text[k - 1] in "eE")):
                k += 1
            lit = text[i:k]
            try:
                float(lit)
            except ValueError:
                diags.append(_err("SYNTAX", f"bad number '{lit}'", SourceSpan(lineno, col, k - i)))
                return [], diags
            kind = "int" if lit.isdigit() else "float"
            tokens.append(Token(kind, lit, lineno, col, k - i))
            i = k
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], lineno, col, j - i))
            i = j
            continue
        if c in "+-?":
            tokens.append(Token("sign", c, lineno, col, 1))
            i += 1
            continue
        if c == "=":
            tokens.append(Token("eq", "=", lineno, col, 1))
            i += 1
            continue
        if c in _WORD_START:
            j = i
            while j < n and text[j] in _WORD_CONT:
                # Stop before an arrow so "a->b" splits into word, arrow, word.
                if text[j] == "-" and j + 1 < n and text[j + 1] == ">":
                    break
                j += 1
            tokens.append(Token("word", text[i:j], lineno, col, j - i))
            i = j
            continue
        diags.append(_err("SYNTAX", f"unexpected character {c!r}", SourceSpan(lineno, col, 1)))
        return [], diags
    return tokens, diags


class LineCursor:
    """Sequential reader over one line's tokens with SYNTAX reporting."""

    def __init__(self, tokens: list[Token], lineno: int, line_len: int):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno
        self.line_len = line_len
        self.diags: list[Diagnostic] = []

    def _end_span(self) -> SourceSpan:
        if self.tokens:
            last = self.tokens[-1]
            return SourceSpan(self.lineno, last.column + last.length, 1)
        return SourceSpan(self.lineno, max(1, self.line_len), 1)

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind: str, what: str) -> Token | None:
        tok = self.peek()
        if tok is None:
            self.diags.append(_err("SYNTAX", f"expected {what}", self._end_span()))
            return None
        if tok.kind != kind:
            self.diags.append(
                _err("SYNTAX", f"expected {what}, got '{tok.text}'", tok.span)
            )
            return None
        self.pos += 1
        return tok

    def take_word(self, what: str, options: tuple[str, ...] | None = None) -> Token | None:
        tok = self.take("word", what)
        if tok is None:
            return None
        if options is not None and tok.text not in options:
            self.diags.append(
                _err("SYNTAX", f"expected one of {'|'.join(options)}, got '{tok.text}'", tok.span)
            )
            return None
        return tok

    def expect_end(self) -> bool:
        tok = self.peek()
        if tok is not None:
            self.diags.append(
                _err("SYNTAX", f"unexpected trailing '{tok.text}'", tok.span)
            )
            return False
        return True


# ---------------------------------------------------------------------------
# Parser

@dataclass
class _RawVar:
    id: int
    id_span: SourceSpan
    name: str
    name_span: SourceSpan
    sector: str
    sector_span: SourceSpan
    kind: VarKind


@dataclass
class _RawLink:
    source: int
    source_span: SourceSpan
    target: int
    target_span: SourceSpan
    polarity: Polarity
    polarity_span: SourceSpan
    anchor: str | None
    span: SourceSpan


@dataclass
class _RawLoop:
    name: str
    name_span: SourceSpan
    kind: LoopClass
    sequence: list[tuple[int, SourceSpan]]


@dataclass
class _RawFile:
    name: str | None = None
    name_span: SourceSpan | None = None
    sectors: list[tuple[str, SourceSpan, str]] = field(default_factory=list)
    variables: list[_RawVar] = field(default_factory=list)
    links: list[_RawLink] = field(default_factory=list)
    loops: list[_RawLoop] = field(default_factory=list)


def _parse_lines(source: str) -> tuple[_RawFile, list[Diagnostic]]:
    raw = _RawFile()
    diags: list[Diagnostic] = []
    for lineno, line in enumerate(source.split("\n"), start=1):
        line = line.rstrip("\r")
        tokens, lex_diags = scan_line(line, lineno)
        diags.extend(lex_diags)
        if lex_diags or not tokens:
            continue
        cur = LineCursor(tokens, lineno, len(line))
        head = cur.take_word("a directive (model/sector/var/link/loop)")
        if head is None:
            diags.extend(cur.diags)
            continue
        if head.text == "model":
            name = cur.take("string", "quoted model name")
            if name is not None and cur.expect_end():
                if raw.name is not None:
                    diags.append(_err("SYNTAX", "duplicate 'model' declaration", head.span))
                else:
                    raw.name = name.text
                    raw.name_span = name.span
        elif head.text == "sector":
            sid = cur.take("word", "sector id")
            sname = cur.take("string", "quoted sector name")
            if sid is not None and sname is not None and cur.expect_end():
                raw.sectors.append((sid.text, sid.span, sname.text))
        elif head.text == "var":
            vid = cur.take("int", "variable id")
            vname = cur.take("string", "quoted variable name")
            kw = cur.take_word("'sector'", ("sector",))
            sec = cur.take("word", "sector id") if kw is not None else None
            kind = VarKind.STOCK
            ok = vid is not None and vname is not None and sec is not None
            if ok and cur.peek() is not None:
                kkw = cur.take_word("'kind'", ("kind",))
                kval = cur.take_word("stock|aux", ("stock", "aux")) if kkw else None
                if kval is None:
                    ok = False
                else:
                    kind = VarKind(kval.text)
            if ok and cur.expect_end():
                raw.variables.append(
                    _RawVar(int(vid.text), vid.span, vname.text, vname.span, sec.text, sec.span, kind)
                )
        elif head.text == "link":
            a = cur.take("int", "source variable id")
            arrow = cur.take("arrow", "'->'") if a is not None else None
            b = cur.take("int", "target variable id") if arrow is not None else None
            sign = cur.take("sign", "polarity (+, - or ?)") if b is not None else None
            anchor = None
            ok = sign is not None
            if ok and cur.peek() is not None:
                atok = cur.take("string", "quoted anchor")
                if atok is None:
                    ok = False
                else:
                    anchor = atok.text
            if ok and cur.expect_end():
                pol = Polarity(sign.text)
                whole = SourceSpan(
                    lineno, a.column, b.column + b.length - a.column
                )
                raw.links.append(
                    _RawLink(int(a.text), a.span, int(b.text), b.span, pol, sign.span, anchor, whole)
                )
        elif head.text == "loop":
            lname = cur.take("word", "loop name")
            lkind = (
                cur.take_word("reinforcing|balancing", ("reinforcing", "balancing"))
                if lname is not None
                else None
            )
            eq = cur.take("eq", "'='") if lkind is not None else None
            seq: list[tuple[int, SourceSpan]] = []
            ok = eq is not None
            while ok and cur.peek() is not None:
                tok = cur.take("int", "variable id")
                if tok is None:
                    ok = False
                else:
                    seq.append((int(tok.text), tok.span))
            if ok and not seq:
                cur.diags.append(_err("SYNTAX", "expected at least one variable id", eq.span))
                ok = False
            if ok:
                raw.loops.append(
                    _RawLoop(lname.text, lname.span, LoopClass(lkind.text), seq)
                )
        else:
            diags.append(
                _err("SYNTAX", f"unknown directive '{head.text}'", head.span)
            )
        diags.extend(cur.diags)
    return raw, diags


def parse_model(source: str) -> ParseResult:
    """Parse DSL text into a validated model, or into error diagnostics."""
    raw, diags = _parse_lines(source)

    if raw.name is None:
        diags.append(_err("SYNTAX", "missing 'model' declaration", SourceSpan(1, 1, 1)))

    sectors: list[Sector] = []
    seen_sector: set[str] = set()
    for sid, span, name in raw.sectors:
        if sid in seen_sector:
            diags.append(_err("DUPLICATE_SECTOR", f"sector '{sid}' declared twice", span))
            continue
        seen_sector.add(sid)
        sectors.append(Sector(sid, name))

    variables: list[Variable] = []
    seen_var: set[int] = set()
    for rv in raw.variables:
        if rv.id < 1:
            diags.append(_err("BAD_ID", "variable id must be >= 1", rv.id_span))
            continue
        if rv.id in seen_var:
            diags.append(
                _err("DUPLICATE_VARIABLE", f"variable {rv.id} declared twice", rv.id_span)
            )
            continue
        seen_var.add(rv.id)
        if not rv.name:
            diags.append(_err("EMPTY_NAME", "variable name must be non-empty", rv.name_span))
            continue
        if rv.sector not in seen_sector:
            diags.append(
                _err("UNKNOWN_SECTOR", f"sector '{rv.sector}' is not declared", rv.sector_span)
            )
            continue
        variables.append(Variable(rv.id, rv.name, rv.sector, rv.kind))

    links: list[Link] = []
    seen_pair: set[tuple[int, int]] = set()
    for rl in raw.links:
        bad = False
        for vid, span in ((rl.source, rl.source_span), (rl.target, rl.target_span)):
            if vid not in seen_var:
                diags.append(
                    _err("UNKNOWN_VARIABLE", f"variable {vid} is not declared", span)
                )
                bad = True
        if rl.source == rl.target:
            diags.append(_err("SELF_LOOP", "self-loops are not allowed", rl.span))
            bad = True
        if (rl.source, rl.target) in seen_pair:
            diags.append(
                _err(
                    "DUPLICATE_LINK",
                    f"link {rl.source}->{rl.target} declared twice",
                    rl.span,
                )
            )
            bad = True
        if bad:
            continue
        seen_pair.add((rl.source, rl.target))
        if rl.polarity is Polarity.UNKNOWN:
            diags.append(
                _warn(
                    "UNKNOWN_POLARITY",
                    f"link {rl.source}->{rl.target} has unknown polarity",
                    rl.polarity_span,
                )
            )
        links.append(Link(rl.source, rl.target, rl.polarity, rl.anchor))

    loops: list[LoopDecl] = []
    seen_loop: set[str] = set()
    for rl in raw.loops:
        if rl.name in seen_loop:
            diags.append(
                _err("DUPLICATE_LOOP_NAME", f"loop '{rl.name}' declared twice", rl.name_span)
            )
            continue
        seen_loop.add(rl.name)
        seq = [vid for vid, _ in rl.sequence]
        if len(seq) < 2:
            diags.append(
                _err("LOOP_TOO_SHORT", "loop needs at least 2 variables", rl.name_span)
            )
            continue
        bad = False
        seen_ids: set[int] = set()
        for vid, span in rl.sequence:
            if vid in seen_ids:
                diags.append(
                    _err("DUPLICATE_IN_SEQUENCE", f"variable {vid} repeats in loop", span)
                )
                bad = True
            seen_ids.add(vid)
            if vid not in seen_var:
                diags.append(
                    _err("UNKNOWN_VARIABLE", f"variable {vid} is not declared", span)
                )
                bad = True
        if not bad:
            for a, b in cycle_edges(seq):
                if (a, b) not in seen_pair:
                    diags.append(
                        _err(
                            "LOOP_EDGE_MISSING",
                            f"loop '{rl.name}' implies missing link {a}->{b}",
                            rl.name_span,
                        )
                    )
                    bad = True
        if not bad:
            loops.append(LoopDecl(rl.name, rl.kind, tuple(seq)))

    if any(d.severity is Severity.ERROR for d in diags):
        return ParseResult(None, diags)

    model = Model(
        name=raw.name,
        sectors=tuple(sectors),
        variables=tuple(variables),
        links=tuple(links),
        loops=tuple(loops),
    )
    return ParseResult(model, diags)


# ---------------------------------------------------------------------------
# Emitter

def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_model(model: Model) -> str:
    """Canonical text form; reparsing yields a model equal to the input.

    Sections are ordered (sectors, variables, links sorted by id/pair;
    loops in declaration order) and the default ``kind stock`` is omitted.
    """
    out: list[str] = [f"model {_quote(model.name)}"]
    if model.sectors:
        out.append("")
        for s in model.sectors:
            out.append(f"sector {s.id} {_quote(s.name)}")
    if model.variables:
        out.append("")
        for v in model.variables:
            kind = " kind aux" if v.kind is VarKind.AUX else ""
            out.append(f"var {v.id} {_quote(v.name)} sector {v.sector}{kind}")
    if model.links:
        out.append("")
        for l in model.links:
            anchor = f" {_quote(l.anchor)}" if l.anchor is not None else ""
            out.append(f"link {l.source} -> {l.target} {l.polarity.symbol}{anchor}")
    if model.loops:
        out.append("")
        for d in model.loops:
            seq = " ".join(str(v) for v in d.sequence)
            out.append(f"loop {d.name} {d.kind.value} = {seq}")
    return "\n".join(out) + "\n"
