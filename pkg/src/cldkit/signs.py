"""Link-sign inference from declared loop classes.

Encoding minus = 1 and plus = 0 turns loop classification into parity
arithmetic: a reinforcing loop needs an even number of minus links along
its cycle, a balancing loop an odd number.  Fixed polarities fold into
the constant term, and the links still marked ``?`` become unknowns of a
linear system over GF(2).  Solving it yields a sign assignment, the
degrees of freedom left open by the declarations, or a contradiction
witness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InconsistentSolutionError, UnverifiedLoopError
from .model import Link, LoopClass, Model, Polarity, cycle_edges

Pair = tuple[int, int]


@dataclass(frozen=True)
class SignSystem:
    unknowns: tuple[Pair, ...]
    # each constraint: (loop name, ascending unknown indices, parity bit)
    constraints: tuple[tuple[str, tuple[int, ...], int], ...]


@dataclass(frozen=True)
class SignSolution:
    consistent: bool
    assignment: dict[Pair, Polarity] | None
    rank: int
    nullspace_dim: int
    conflict_witness: tuple[str, ...] | None


def build_system(model: Model) -> SignSystem:
    """Extract the parity system from a model's declared loops.

    Every declared loop must be structurally sound first; a loop with a
    missing edge has no well-defined parity.
    """
    unknowns = tuple(l.pair for l in model.links if l.polarity is Polarity.UNKNOWN)
    index = {pair: i for i, pair in enumerate(unknowns)}
    constraints = []
    for decl in model.loops:
        bit = 0 if decl.kind is LoopClass.REINFORCING else 1
        indices = []
        for a, b in cycle_edges(decl.sequence):
            if not model.has_link(a, b):
                raise UnverifiedLoopError(
                    f"loop {decl.name}: link {a}->{b} is not in the model"
                )
            pol = model.polarity(a, b)
            if pol is Polarity.MINUS:
                bit ^= 1
            elif pol is Polarity.UNKNOWN:
                indices.append(index[(a, b)])
        constraints.append((decl.name, tuple(sorted(indices)), bit))
    return SignSystem(unknowns, tuple(constraints))


def _matrix(system: SignSystem) -> tuple[np.ndarray, np.ndarray]:
    m = len(system.constraints)
    n = len(system.unknowns)
    a = np.zeros((m, n), dtype=np.uint8)
    b = np.zeros(m, dtype=np.uint8)
    for r, (_, indices, bit) in enumerate(system.constraints):
        for i in indices:
            a[r, i] = 1
        b[r] = bit
    return a, b


def _eliminate(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[int], bool]:
    """In-place RREF over GF(2); returns (a, b, pivot columns, consistent)."""
    m, n = a.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        hit = np.nonzero(a[row:, col])[0]
        if hit.size == 0:
            continue
        piv = row + int(hit[0])
        if piv != row:
            a[[row, piv]] = a[[piv, row]]
            b[[row, piv]] = b[[piv, row]]
        others = np.nonzero(a[:, col])[0]
        for r in others:
            if r != row:
                a[r, :] ^= a[row, :]
                b[r] ^= b[row]
        pivots.append(col)
        row += 1
        if row == m:
            break
    consistent = not np.any(b[row:]) if row < m else True
    return a, b, pivots, consistent


def _is_consistent(a: np.ndarray, b: np.ndarray) -> bool:
    _, _, _, ok = _eliminate(a.copy(), b.copy())
    return ok


def _greedy_assignment(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Particular solution preferring plus (0) on earlier links.

    Scans unknowns in link order; each is set to 0 when the remaining
    system still admits a solution, else to 1.  The result is the
    lexicographically smallest satisfying vector, so the all-plus
    assignment is returned whenever it is feasible.
    """
    n = a.shape[1]
    x = np.zeros(n, dtype=np.uint8)
    resid_a = a.copy()
    resid_b = b.copy()
    for i in range(n):
        trial_b = resid_b.copy()  # value 0 leaves b unchanged
        if _is_consistent(resid_a[:, i + 1 :], trial_b):
            x[i] = 0
        else:
            x[i] = 1
            resid_b = resid_b ^ resid_a[:, i]
    return x


def _free_assignment(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Particular solution with every free variable 0 (RREF back-substitution)."""
    ra, rb, pivots, _ = _eliminate(a.copy(), b.copy())
    n = a.shape[1]
    x = np.zeros(n, dtype=np.uint8)
    for row, col in enumerate(pivots):
        free_terms = int(np.bitwise_xor.reduce(ra[row, :] * x)) if n else 0
        # pivot entry itself contributes x[col], currently 0
        x[col] = rb[row] ^ free_terms
    return x


def _conflict_witness(system: SignSystem) -> tuple[str, ...]:
    """Greedy irreducible inconsistent subset of constraint names."""
    kept = list(range(len(system.constraints)))

    def inconsistent(rows: list[int]) -> bool:
        sub = SignSystem(
            system.unknowns, tuple(system.constraints[r] for r in rows)
        )
        a, b = _matrix(sub)
        return not _is_consistent(a, b)

    for r in list(kept):
        trial = [k for k in kept if k != r]
        if inconsistent(trial):
            kept = trial
    return tuple(system.constraints[r][0] for r in kept)


def solve(system: SignSystem, prefer_plus: bool = True) -> SignSolution:
    """Solve the parity system.

    Inconsistency is reported as data (with an irreducible conflict
    witness), not raised.  With ``prefer_plus`` the particular solution
    is the lexicographically smallest satisfying vector in link order;
    otherwise it is the free-variables-zero solution of the RREF.
    """
    a, b = _matrix(system)
    _, _, pivots, consistent = _eliminate(a.copy(), b.copy())
    rank = len(pivots)
    nullspace = len(system.unknowns) - rank
    if not consistent:
        return SignSolution(False, None, rank, nullspace, _conflict_witness(system))
    x = _greedy_assignment(a, b) if prefer_plus else _free_assignment(a, b)
    assignment = {
        pair: Polarity.MINUS if x[i] else Polarity.PLUS
        for i, pair in enumerate(system.unknowns)
    }
    return SignSolution(True, assignment, rank, nullspace, None)


def nullspace_basis(system: SignSystem) -> list[dict[Pair, int]]:
    """Basis of sign-flip patterns that preserve every declared parity."""
    a, _ = _matrix(system)
    ra, _, pivots, _ = _eliminate(a.copy(), np.zeros(a.shape[0], dtype=np.uint8))
    n = len(system.unknowns)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = []
    for f in free:
        vec = np.zeros(n, dtype=np.uint8)
        vec[f] = 1
        for row, col in enumerate(pivots):
            vec[col] = ra[row, f]
        basis.append({system.unknowns[i]: int(vec[i]) for i in range(n)})
    return basis


def apply_solution(model: Model, solution: SignSolution) -> Model:
    """Model with unknown polarities replaced by the solved assignment."""
    if not solution.consistent:
        raise InconsistentSolutionError("cannot apply an inconsistent solution")
    assignment = solution.assignment or {}
    new_links = []
    for link in model.links:
        if link.polarity is Polarity.UNKNOWN and link.pair in assignment:
            link = Link(link.source, link.target, assignment[link.pair], link.anchor)
        new_links.append(link)
    return model.with_links(new_links)
