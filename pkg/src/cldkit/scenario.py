"""Scenario files: simulation setup for a model.

Line-oriented like the model DSL, with ``#`` comments::

    scenario "<name>"
    horizon <float> step <float> integrator euler|rk4
    init <id> <float>
    gain <id> -> <id> <float>
    decay <id> <float>
    form <id> linear|sat <K>
    drive <id> constant <float>|ramp <float>
    shock <id> at <float> set|add <float>
    output <id> ...

The ``scenario`` and ``horizon`` lines are required, everything else is
optional with documented defaults (init 1.0, gain 1.0, decay 0.1, linear
form, no drive).  When a model is supplied, every referenced id must be
one of its variables and every gain pair one of its links.  A gain of 0
is allowed and turns the link off for the run.

Diagnostic codes: SYNTAX, BAD_VALUE, DUPLICATE_DIRECTIVE,
UNKNOWN_REFERENCE.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .dsl import Diagnostic, LineCursor, Severity, SourceSpan, Token, scan_line
from .model import Model

DEFAULT_INIT = 1.0
DEFAULT_GAIN = 1.0
DEFAULT_DECAY = 0.1


class Integrator(enum.Enum):
    EULER = "euler"
    RK4 = "rk4"


@dataclass(frozen=True)
class Form:
    kind: str  # "linear" | "sat"
    k: float | None = None


@dataclass(frozen=True)
class Drive:
    kind: str  # "constant" | "ramp"
    value: float

    def at(self, t: float) -> float:
        return self.value if self.kind == "constant" else self.value * t


@dataclass(frozen=True)
class Shock:
    variable: int
    time: float
    mode: str  # "set" | "add"
    value: float


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    horizon: float
    dt: float
    integrator: Integrator
    init: dict[int, float] = field(default_factory=dict)
    gains: dict[tuple[int, int], float] = field(default_factory=dict)
    decay: dict[int, float] = field(default_factory=dict)
    forms: dict[int, Form] = field(default_factory=dict)
    drives: dict[int, Drive] = field(default_factory=dict)
    shocks: tuple[Shock, ...] = ()
    outputs: tuple[int, ...] = ()


@dataclass
class ScenarioParseResult:
    spec: ScenarioSpec | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.spec is not None

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]


def _err(code: str, message: str, span: SourceSpan) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span)


def _take_number(cur: LineCursor, what: str) -> Token | None:
    tok = cur.peek()
    if tok is None or tok.kind not in ("int", "float"):
        return cur.take("float", what)  # reuses the error path
    cur.pos += 1
    return tok


def parse_scenario(source: str, model: Model | None = None) -> ScenarioParseResult:
    """Parse scenario text; bind against a model when one is given."""
    diags: list[Diagnostic] = []
    name: str | None = None
    horizon = dt = None
    integrator = None
    init: dict[int, float] = {}
    gains: dict[tuple[int, int], float] = {}
    decay: dict[int, float] = {}
    forms: dict[int, Form] = {}
    drives: dict[int, Drive] = {}
    shocks: list[Shock] = []
    shock_spans: list[SourceSpan] = []
    outputs: list[int] = []

    def known_var(tok: Token) -> bool:
        vid = int(tok.text)
        if model is not None and vid not in model.variables_by_id:
            diags.append(
                _err("UNKNOWN_REFERENCE", f"variable {vid} is not in the model", tok.span)
            )
            return False
        return True

    def once(table: dict, key, tok: Token, label: str) -> bool:
        if key in table:
            diags.append(
                _err("DUPLICATE_DIRECTIVE", f"{label} already given", tok.span)
            )
            return False
        return True

    for lineno, line in enumerate(source.split("\n"), start=1):
        line = line.rstrip("\r")
        tokens, lex_diags = scan_line(line, lineno, numbers="float")
        diags.extend(lex_diags)
        if lex_diags or not tokens:
            continue
        cur = LineCursor(tokens, lineno, len(line))
        head = cur.take_word("a directive")
        if head is None:
            diags.extend(cur.diags)
            continue

        if head.text == "scenario":
            tok = cur.take("string", "quoted scenario name")
            if tok is not None and cur.expect_end():
                if name is not None:
                    diags.append(_err("DUPLICATE_DIRECTIVE", "scenario name already given", head.span))
                else:
                    name = tok.text
        elif head.text == "horizon":
            h = _take_number(cur, "horizon value")
            step_kw = cur.take_word("'step'", ("step",)) if h is not None else None
            s = _take_number(cur, "step value") if step_kw is not None else None
            ikw = cur.take_word("'integrator'", ("integrator",)) if s is not None else None
            ival = cur.take_word("euler|rk4", ("euler", "rk4")) if ikw is not None else None
            if ival is not None and cur.expect_end():
                if horizon is not None:
                    diags.append(_err("DUPLICATE_DIRECTIVE", "horizon already given", head.span))
                    diags.extend(cur.diags)
                    continue
                horizon = float(h.text)
                dt = float(s.text)
                integrator = Integrator(ival.text)
                if horizon <= 0:
                    diags.append(_err("BAD_VALUE", "horizon must be > 0", h.span))
                if dt <= 0:
                    diags.append(_err("BAD_VALUE", "step must be > 0", s.span))
                elif horizon > 0 and dt > horizon:
                    diags.append(_err("BAD_VALUE", "step must not exceed horizon", s.span))
        elif head.text == "init":
            vid = cur.take("int", "variable id")
            val = _take_number(cur, "initial value") if vid is not None else None
            if val is not None and cur.expect_end() and known_var(vid):
                v = int(vid.text)
                if once(init, v, vid, f"init {v}"):
                    x = float(val.text)
                    if x < 0:
                        diags.append(_err("BAD_VALUE", "initial level must be >= 0", val.span))
                    else:
                        init[v] = x
        elif head.text == "gain":
            a = cur.take("int", "source variable id")
            arrow = cur.take("arrow", "'->'") if a is not None else None
            b = cur.take("int", "target variable id") if arrow is not None else None
            val = _take_number(cur, "gain value") if b is not None else None
            if val is not None and cur.expect_end():
                pair = (int(a.text), int(b.text))
                if model is not None and pair not in model.links_by_pair:
                    diags.append(
                        _err(
                            "UNKNOWN_REFERENCE",
                            f"link {pair[0]}->{pair[1]} is not in the model",
                            SourceSpan(lineno, a.column, b.column + b.length - a.column),
                        )
                    )
                elif once(gains, pair, a, f"gain {pair[0]}->{pair[1]}"):
                    x = float(val.text)
                    if x < 0:
                        diags.append(_err("BAD_VALUE", "gain must be >= 0", val.span))
                    else:
                        gains[pair] = x
        elif head.text == "decay":
            vid = cur.take("int", "variable id")
            val = _take_number(cur, "decay rate") if vid is not None else None
            if val is not None and cur.expect_end() and known_var(vid):
                v = int(vid.text)
                if once(decay, v, vid, f"decay {v}"):
                    x = float(val.text)
                    if x < 0:
                        diags.append(_err("BAD_VALUE", "decay must be >= 0", val.span))
                    else:
                        decay[v] = x
        elif head.text == "form":
            vid = cur.take("int", "variable id")
            kind = cur.take_word("linear|sat", ("linear", "sat")) if vid is not None else None
            ok = kind is not None
            form = None
            if ok and kind.text == "sat":
                kval = _take_number(cur, "saturation constant")
                if kval is None:
                    ok = False
                else:
                    k = float(kval.text)
                    if k <= 0:
                        diags.append(_err("BAD_VALUE", "saturation constant must be > 0", kval.span))
                        ok = False
                    else:
                        form = Form("sat", k)
            elif ok:
                form = Form("linear")
            if ok and cur.expect_end() and known_var(vid):
                v = int(vid.text)
                if once(forms, v, vid, f"form {v}"):
                    forms[v] = form
        elif head.text == "drive":
            vid = cur.take("int", "variable id")
            kind = (
                cur.take_word("constant|ramp", ("constant", "ramp"))
                if vid is not None
                else None
            )
            val = _take_number(cur, "drive value") if kind is not None else None
            if val is not None and cur.expect_end() and known_var(vid):
                v = int(vid.text)
                if once(drives, v, vid, f"drive {v}"):
                    drives[v] = Drive(kind.text, float(val.text))
        elif head.text == "shock":
            vid = cur.take("int", "variable id")
            at = cur.take_word("'at'", ("at",)) if vid is not None else None
            t = _take_number(cur, "shock time") if at is not None else None
            mode = cur.take_word("set|add", ("set", "add")) if t is not None else None
            val = _take_number(cur, "shock value") if mode is not None else None
            if val is not None and cur.expect_end() and known_var(vid):
                tv = float(t.text)
                if tv < 0:
                    diags.append(_err("BAD_VALUE", "shock time must be >= 0", t.span))
                else:
                    shocks.append(Shock(int(vid.text), tv, mode.text, float(val.text)))
                    shock_spans.append(t.span)
        elif head.text == "output":
            ids = []
            saw_any = False
            while cur.peek() is not None:
                tok = cur.take("int", "variable id")
                if tok is None:
                    break
                saw_any = True
                if known_var(tok):
                    vid = int(tok.text)
                    if vid in outputs or vid in ids:
                        diags.append(
                            _err("DUPLICATE_DIRECTIVE", f"output {vid} already listed", tok.span)
                        )
                    else:
                        ids.append(vid)
            if not saw_any and not cur.diags:
                cur.diags.append(_err("SYNTAX", "expected at least one variable id", head.span))
            outputs.extend(ids)
        else:
            diags.append(_err("SYNTAX", f"unknown directive '{head.text}'", head.span))
        diags.extend(cur.diags)

    if name is None:
        diags.append(_err("SYNTAX", "missing 'scenario' declaration", SourceSpan(1, 1, 1)))
    if horizon is None:
        diags.append(_err("SYNTAX", "missing 'horizon' declaration", SourceSpan(1, 1, 1)))
    elif horizon > 0 and dt > 0:
        for shock, span in zip(shocks, shock_spans):
            if shock.time > horizon:
                diags.append(
                    _err(
                        "BAD_VALUE",
                        f"shock at t={shock.time:g} is beyond the horizon",
                        span,
                    )
                )

    if any(d.severity is Severity.ERROR for d in diags):
        return ScenarioParseResult(None, diags)

    if not outputs and model is not None:
        outputs = [v.id for v in model.variables]
    spec = ScenarioSpec(
        name=name,
        horizon=horizon,
        dt=dt,
        integrator=integrator,
        init=init,
        gains=gains,
        decay=decay,
        forms=forms,
        drives=drives,
        shocks=tuple(shocks),
        outputs=tuple(outputs),
    )
    return ScenarioParseResult(spec, diags)
