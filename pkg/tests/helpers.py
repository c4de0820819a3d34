"""Shared test data, independent oracles, and a CLI runner.

The oracles here are deliberately naive and structured differently from
the package code (plain-dict DFS, Python-int bitset elimination, a
dict-based integrator) so tests compare two implementations rather than
one implementation with itself.
"""

from __future__ import annotations

import io
import math
from contextlib import redirect_stderr, redirect_stdout

from cldkit import cli
from cldkit.model import (
    Link,
    LoopClass,
    LoopDecl,
    Model,
    Polarity,
    Sector,
    VarKind,
    Variable,
)
from cldkit.scenario import DEFAULT_DECAY, DEFAULT_GAIN, DEFAULT_INIT, Integrator

# Ground truth for the bundled model, restated by hand so the corpus file
# is checked against an in-test copy rather than against itself.
DECLARED = {
    "R1": (1, 2, 3, 4),
    "R2": (3, 5, 6),
    "R3": (7, 8, 9, 10, 11, 12),
    "R4": (13, 14, 8, 9, 10, 11, 12),
    "R5": (2, 15, 8, 9, 10, 11, 12, 13, 18, 4, 1),
    "R6": (22, 10, 11, 12, 13),
    "R7": (22, 8, 9, 10, 11, 12, 13),
    "R8": (2, 13, 18, 4, 1),
    "R9": (23, 12, 13),
    "R10": (24, 11, 12, 13),
    "R11": (13, 25, 17, 12),
    "R12": (26, 27, 9, 10, 11, 12, 13, 18, 4, 5),
    "R13": (9, 10),
    "R14": (9, 16),
    "R15": (20, 19, 8, 9, 10, 11, 12, 13),
    "B1": (2, 19, 8, 9, 10, 11, 12, 13, 18, 4, 1),
    "B2": (19, 21, 20),
    "B3": (5, 9, 10, 11, 12, 13, 18, 4),
}

MINUS_LINKS = frozenset({(19, 8), (20, 19), (13, 23), (23, 12), (5, 9)})

ACCEPTANCE_LABELS = {
    1: "declared-loop verification: 18/18 found, 15 reinforcing + 3 balancing",
    2: "canonical structure: 27 variables and 45 links equal the loop-edge union",
    3: "cycle enumeration agrees with the brute-force oracle everywhere",
    4: "flipping any single link polarity breaks verification",
    5: "sign inference recovers the canonical assignment; rank matches the oracle",
    6: "parser round-trip holds on the corpus and 500 random models",
    7: "simulation laws: growth, regulation, convergence order, sign agreement",
    8: "goldens regenerate byte-identically and scenario comparisons hold",
}


def loop_edges(seq):
    n = len(seq)
    return [(seq[i], seq[(i + 1) % n]) for i in range(n)]


def rotate_min(seq):
    k = min(range(len(seq)), key=lambda i: seq[i])
    return tuple(seq[k:]) + tuple(seq[:k])


def declared_edge_union():
    edges = set()
    for seq in DECLARED.values():
        edges.update(loop_edges(seq))
    return edges


# ---------------------------------------------------------------------------
# Oracle 1: brute-force elementary-cycle enumeration.


def naive_cycles(edges, max_len=None):
    """Every elementary cycle as a min-rotated tuple, via plain DFS.

    Starts a search at each node and only walks through larger node ids,
    which yields each cycle exactly once, already min-rotated.
    """
    adj = {}
    nodes = set()
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        nodes.add(a)
        nodes.add(b)
    found = set()
    for root in sorted(nodes):
        stack = [root]
        seen = {root}

        def walk(v):
            for w in sorted(adj.get(v, ())):
                if w == root and len(stack) >= 2:
                    found.add(tuple(stack))
                elif w > root and w not in seen:
                    if max_len is not None and len(stack) >= max_len:
                        continue
                    stack.append(w)
                    seen.add(w)
                    walk(w)
                    stack.pop()
                    seen.remove(w)

        walk(root)
    return found


# ---------------------------------------------------------------------------
# Oracle 2: GF(2) elimination on Python-int bitsets.


def bitset_eliminate(rows, bits, ncols):
    """Rank and consistency of a parity system, rows as int bitmasks."""
    work = list(zip(rows, bits))
    rank = 0
    for col in range(ncols):
        piv = next(
            (i for i in range(rank, len(work)) if (work[i][0] >> col) & 1), None
        )
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        prow, pbit = work[rank]
        for i in range(len(work)):
            if i != rank and ((work[i][0] >> col) & 1):
                work[i] = (work[i][0] ^ prow, work[i][1] ^ pbit)
        rank += 1
    consistent = all(row or not bit for row, bit in work)
    return rank, consistent


def system_rank(system):
    """Rank of a SignSystem's constraint matrix per the bitset oracle."""
    ncols = len(system.unknowns)
    rows = []
    bits = []
    for _, indices, bit in system.constraints:
        mask = 0
        for i in indices:
            mask |= 1 << i
        rows.append(mask)
        bits.append(bit)
    return bitset_eliminate(rows, bits, ncols)


# ---------------------------------------------------------------------------
# Oracle 3: dict-based reference integrator.


def reference_integrate(model, spec):
    """Integrate a scenario with plain dicts and lists.

    Mirrors the documented semantics (grid layout, shock snapping, the
    post-step clamp) but shares no code or data layout with the engine.
    """
    incoming = {v.id: [] for v in model.variables}
    for link in model.links:
        sign = 1.0 if link.polarity is Polarity.PLUS else -1.0
        gain = spec.gains.get(link.pair, DEFAULT_GAIN)
        incoming[link.target].append((link.source, sign * gain))

    forms = {v.id: spec.forms.get(v.id) for v in model.variables}

    def f(vid, value):
        form = forms[vid]
        if form is None or form.kind == "linear":
            return value
        return value / (1.0 + value / form.k)

    decay = {v.id: spec.decay.get(v.id, DEFAULT_DECAY) for v in model.variables}
    drives = {v.id: spec.drives.get(v.id) for v in model.variables}

    def deriv(state, t):
        out = {}
        for v in model.variables:
            vid = v.id
            total = 0.0
            for src, w in incoming[vid]:
                total += w * f(src, state[src])
            total -= decay[vid] * state[vid]
            drive = drives[vid]
            if drive is not None:
                total += drive.at(t)
            out[vid] = total
        return out

    n_steps = int(math.floor(spec.horizon / spec.dt + 1e-9))
    shocks_at = {}
    for shock in spec.shocks:
        idx = min(int(math.ceil(shock.time / spec.dt - 1e-9)), n_steps)
        shocks_at.setdefault(idx, []).append(shock)

    state = {v.id: spec.init.get(v.id, DEFAULT_INIT) for v in model.variables}
    for shock in shocks_at.get(0, ()):
        _apply_shock(state, shock)
    times = [0.0]
    series = {vid: [state[vid]] for vid in state}
    dt = spec.dt
    for k in range(n_steps):
        t = k * dt
        if spec.integrator is Integrator.EULER:
            d = deriv(state, t)
            state = {vid: state[vid] + dt * d[vid] for vid in state}
        else:
            k1 = deriv(state, t)
            s2 = {vid: state[vid] + 0.5 * dt * k1[vid] for vid in state}
            k2 = deriv(s2, t + 0.5 * dt)
            s3 = {vid: state[vid] + 0.5 * dt * k2[vid] for vid in state}
            k3 = deriv(s3, t + 0.5 * dt)
            s4 = {vid: state[vid] + dt * k3[vid] for vid in state}
            k4 = deriv(s4, t + dt)
            state = {
                vid: state[vid]
                + (dt / 6.0) * (k1[vid] + 2.0 * k2[vid] + 2.0 * k3[vid] + k4[vid])
                for vid in state
            }
        state = {vid: (0.0 if x < 0.0 else x) for vid, x in state.items()}
        for shock in shocks_at.get(k + 1, ()):
            _apply_shock(state, shock)
        times.append((k + 1) * dt)
        for vid in state:
            series[vid].append(state[vid])
    return times, series


def _apply_shock(state, shock):
    if shock.mode == "set":
        state[shock.variable] = shock.value
    else:
        state[shock.variable] += shock.value
    if state[shock.variable] < 0.0:
        state[shock.variable] = 0.0


# ---------------------------------------------------------------------------
# Model builders.


def build_model(edges, signs=None, loops=(), name="test"):
    """A one-sector model over the given edges.

    ``signs`` maps edge -> polarity symbol; unmapped edges default to plus.
    """
    signs = signs or {}
    ids = sorted({v for e in edges for v in e})
    return Model(
        name=name,
        sectors=(Sector("s", "Sector"),),
        variables=tuple(Variable(i, f"Variable {i}", "s") for i in ids),
        links=tuple(
            Link(a, b, Polarity(signs.get((a, b), "+"))) for a, b in sorted(edges)
        ),
        loops=tuple(loops),
    )


def declare(name, kind, seq):
    return LoopDecl(name, LoopClass(kind), tuple(seq))


def random_digraph(rng, n, p):
    """Edge set of a random simple digraph on nodes 1..n, no self loops."""
    return {
        (a, b)
        for a in range(1, n + 1)
        for b in range(1, n + 1)
        if a != b and rng.random() < p
    }


_NAME_CHARS = 'abcdefghizXYZ 0123456789-&/\'"\\#Ωé'


def random_model(rng):
    """A random valid model exercising the full surface of the format."""
    sectors = tuple(
        Sector(f"sec-{i}", _random_name(rng)) for i in range(rng.randint(1, 3))
    )
    n_vars = rng.randint(1, 12)
    variables = tuple(
        Variable(
            i,
            _random_name(rng),
            sectors[rng.randrange(len(sectors))].id,
            VarKind.AUX if rng.random() < 0.3 else VarKind.STOCK,
        )
        for i in range(1, n_vars + 1)
    )
    edges = sorted(random_digraph(rng, n_vars, 0.25))
    links = tuple(
        Link(
            a,
            b,
            Polarity(rng.choice("++-?")),
            _random_name(rng) if rng.random() < 0.3 else None,
        )
        for a, b in edges
    )
    cycles = sorted(naive_cycles(edges))
    loops = tuple(
        declare(f"L{i + 1}", rng.choice(["reinforcing", "balancing"]), seq)
        for i, seq in enumerate(cycles[:3])
    )
    return Model(
        name=_random_name(rng),
        sectors=sectors,
        variables=variables,
        links=links,
        loops=loops,
    )


def _random_name(rng):
    while True:
        name = "".join(
            rng.choice(_NAME_CHARS) for _ in range(rng.randint(1, 14))
        ).strip()
        if name:
            return name


# ---------------------------------------------------------------------------
# CLI runner.


def run_cli(*argv):
    """Invoke the CLI in process; returns (exit code, stdout, stderr)."""
    out = io.StringIO()
    err = io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main(list(argv))
    return code, out.getvalue(), err.getvalue()
