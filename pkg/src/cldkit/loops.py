"""Feedback-loop enumeration, classification, and participation metrics.

Cycles are directed elementary cycles, identified up to rotation (the
graph is directed, so a cycle and its reversal are distinct).  The
canonical rotation starts at the smallest variable id, and enumeration
output is sorted lexicographically by canonical sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CycleLimitError, DuplicateInSequenceError, EdgeMissingError
from .model import LoopClass, Model, Polarity, cycle_edges

CYCLE_CAP = 1_000_000


@dataclass(frozen=True)
class FoundLoop:
    sequence: tuple[int, ...]
    minus_count: int
    loop_class: LoopClass


@dataclass(frozen=True)
class LoopVerdict:
    loop_name: str
    found: bool
    class_matches: bool
    computed_class: LoopClass | None
    missing_edges: tuple[tuple[int, int], ...]


def canonical_rotation(sequence: Sequence[int]) -> tuple[int, ...]:
    """Rotate a cycle sequence so its smallest id comes first."""
    if not sequence:
        return ()
    k = min(range(len(sequence)), key=lambda i: sequence[i])
    return tuple(sequence[k:]) + tuple(sequence[:k])


def classify(model: Model, sequence: Sequence[int]) -> tuple[int, LoopClass]:
    """Minus count and polarity class of one cycle.

    Reinforcing iff the minus count is even; any unknown-polarity edge
    makes the class indeterminate (the count then covers known minuses).
    """
    if len(set(sequence)) != len(sequence):
        raise DuplicateInSequenceError("cycle sequence repeats a variable id")
    minus = 0
    unknown = False
    for a, b in cycle_edges(sequence):
        if not model.has_link(a, b):
            raise EdgeMissingError(f"no link {a}->{b}")
        pol = model.polarity(a, b)
        if pol is Polarity.MINUS:
            minus += 1
        elif pol is Polarity.UNKNOWN:
            unknown = True
    if unknown:
        return minus, LoopClass.INDETERMINATE
    return minus, LoopClass.REINFORCING if minus % 2 == 0 else LoopClass.BALANCING


def _adjacency(model: Model) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {v.id: [] for v in model.variables}
    for link in model.links:
        adj[link.source].append(link.target)
    return adj


def _scc_with(adj: dict[int, list[int]], root: int) -> set[int]:
    """Vertices on the same strongly connected component as root."""
    fwd = {root}
    stack = [root]
    while stack:
        for w in adj.get(stack.pop(), ()):
            if w not in fwd:
                fwd.add(w)
                stack.append(w)
    radj: dict[int, list[int]] = {}
    for v, ws in adj.items():
        for w in ws:
            radj.setdefault(w, []).append(v)
    back = {root}
    stack = [root]
    while stack:
        for w in radj.get(stack.pop(), ()):
            if w not in back:
                back.add(w)
                stack.append(w)
    return fwd & back


def _circuits_from(adj: dict[int, list[int]], root: int, out: list[tuple[int, ...]], cap: int) -> None:
    """Johnson-style search for circuits through root, restricted to ids >= root."""
    sub = {
        v: [w for w in ws if w >= root]
        for v, ws in adj.items()
        if v >= root
    }
    scc = _scc_with(sub, root)
    if len(scc) < 2:
        return
    graph = {v: sorted(w for w in sub[v] if w in scc) for v in scc}
    blocked = {v: False for v in scc}
    bmap: dict[int, set[int]] = {v: set() for v in scc}
    path: list[int] = []

    def unblock(u: int) -> None:
        stack = [u]
        while stack:
            x = stack.pop()
            if blocked[x]:
                blocked[x] = False
                stack.extend(bmap[x])
                bmap[x].clear()

    def circuit(v: int) -> bool:
        found = False
        path.append(v)
        blocked[v] = True
        for w in graph[v]:
            if w == root:
                out.append(tuple(path))
                if len(out) > cap:
                    raise CycleLimitError(cap)
                found = True
            elif not blocked[w]:
                if circuit(w):
                    found = True
        if found:
            unblock(v)
        else:
            for w in graph[v]:
                bmap[w].add(v)
        path.pop()
        return found

    circuit(root)


def _bounded_from(
    adj: dict[int, list[int]], root: int, max_len: int, out: list[tuple[int, ...]], cap: int
) -> None:
    """Plain depth-bounded DFS; Johnson's blocking is unsound under a length cap."""
    path = [root]
    onpath = {root}

    def dfs(v: int) -> None:
        for w in adj.get(v, ()):
            if w == root:
                if len(path) >= 2:
                    out.append(tuple(path))
                    if len(out) > cap:
                        raise CycleLimitError(cap)
            elif w > root and w not in onpath and len(path) < max_len:
                path.append(w)
                onpath.add(w)
                dfs(w)
                path.pop()
                onpath.remove(w)

    dfs(root)


def enumerate_cycles(
    model: Model, max_len: int | None = None, cap: int = CYCLE_CAP
) -> list[FoundLoop]:
    """All elementary cycles of the model graph, classified.

    Each cycle appears once in canonical rotation; output is sorted
    lexicographically by sequence.  ``max_len`` bounds cycle length;
    ``cap`` bounds the total count and overflowing it is an error, so a
    result is never silently truncated.
    """
    adj = _adjacency(model)
    raw: list[tuple[int, ...]] = []
    for root in sorted(adj):
        if max_len is None:
            _circuits_from(adj, root, raw, cap)
        else:
            _bounded_from(adj, root, max_len, raw, cap)
    raw.sort()
    return [FoundLoop(seq, *classify(model, seq)) for seq in raw]


def verify_declared(model: Model) -> list[LoopVerdict]:
    """Check every declared loop against the graph, in declaration order."""
    verdicts = []
    for decl in model.loops:
        seq = decl.sequence
        distinct = len(set(seq)) == len(seq) and len(seq) >= 2
        missing = tuple(
            (a, b) for a, b in cycle_edges(seq) if not model.has_link(a, b)
        )
        found = distinct and not missing
        if found:
            _, computed = classify(model, seq)
            matches = computed is decl.kind
        else:
            computed = None
            matches = False
        verdicts.append(LoopVerdict(decl.name, found, matches, computed, missing))
    return verdicts


def _loop_sets(model: Model, over: str, max_len: int | None, cap: int) -> list[tuple[int, ...]]:
    if over == "declared":
        return [d.sequence for d in model.loops]
    if over == "enumerated":
        return [f.sequence for f in enumerate_cycles(model, max_len=max_len, cap=cap)]
    raise ValueError(f"over must be 'declared' or 'enumerated', not {over!r}")


def loop_participation(
    model: Model, over: str = "declared", max_len: int | None = None, cap: int = CYCLE_CAP
) -> dict[int, int]:
    """How many loops contain each variable; 0 for variables in none."""
    counts = {v.id: 0 for v in model.variables}
    for seq in _loop_sets(model, over, max_len, cap):
        for vid in seq:
            if vid in counts:
                counts[vid] += 1
    return counts


def link_participation(
    model: Model, over: str = "declared", max_len: int | None = None, cap: int = CYCLE_CAP
) -> dict[tuple[int, int], int]:
    """How many loops traverse each link; 0 for links on none."""
    counts = {l.pair: 0 for l in model.links}
    for seq in _loop_sets(model, over, max_len, cap):
        for edge in cycle_edges(seq):
            if edge in counts:
                counts[edge] += 1
    return counts


def match_declared(model: Model, loops: Iterable[FoundLoop]) -> dict[tuple[int, ...], str]:
    """Map canonical sequences of found loops to declared names where one exists."""
    declared = {canonical_rotation(d.sequence): d.name for d in model.loops}
    return {
        f.sequence: declared[f.sequence] for f in loops if f.sequence in declared
    }
