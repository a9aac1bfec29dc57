"""Sequence-form strategy polytopes.

A player's strategy space is the set {z >= 0, E z = e} whose constraint
matrix encodes a tree of nested simplexes: row 0 pins the root sequence
to probability one, and every later row moves the mass of a parent
sequence onto the sequences extending it at one information set. The
one-row encoding E = (1, ..., 1), e = (1) used by plain matrix games is
recognized and handled as a dedicated simplex mode.

Validation reports violations as data rather than raising, so tools can
list everything wrong with a file at once.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import (DimensionError, FeasibilityWarning, FileFormatError,
                     StructureError)
from .sparse import SparseMatrix


@dataclass(frozen=True)
class Violation:
    """One structural rule broken by a constraint system."""

    matrix: str
    where: str
    rule: str

    def __str__(self) -> str:
        return f"{self.matrix} {self.where}: {self.rule}"


@dataclass(frozen=True, eq=False)
class SequenceFormGame:
    """Two-person zero-sum game in sequence form.

    A holds payoffs to the maximizing player (player 1), with rows
    indexed by player 1 sequences and columns by player 2 sequences.
    E1, e1 and E2, e2 are the players' realization-plan constraints.
    Construction is permissive; run validate_sequence_form to check the
    structural rules.
    """

    A: SparseMatrix
    E1: SparseMatrix
    E2: SparseMatrix
    e1: np.ndarray
    e2: np.ndarray
    labels: Optional[dict] = None

    def __post_init__(self):
        for name in ("e1", "e2"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1:
                raise ValueError(f"{name} must be a vector")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n1(self) -> int:
        return self.E1.cols

    @property
    def n2(self) -> int:
        return self.E2.cols

    @property
    def l1(self) -> int:
        return self.E1.rows

    @property
    def l2(self) -> int:
        return self.E2.rows

    @functools.cached_property
    def index1(self) -> "TreeplexIndex":
        return build_treeplex_index(self.E1, self.e1, player=1)

    @functools.cached_property
    def index2(self) -> "TreeplexIndex":
        return build_treeplex_index(self.E2, self.e2, player=2)

    def to_dict(self) -> dict:
        doc = {
            "n1": self.n1,
            "n2": self.n2,
            "l1": self.l1,
            "l2": self.l2,
            "A": self.A.to_dict(),
            "E1": self.E1.to_dict(),
            "E2": self.E2.to_dict(),
            "e1": [float(x) for x in self.e1],
            "e2": [float(x) for x in self.e2],
        }
        if self.labels is not None:
            doc["labels"] = self.labels
        return doc

    @classmethod
    def from_dict(cls, doc) -> "SequenceFormGame":
        if not isinstance(doc, dict):
            raise FileFormatError("game must be a JSON object")
        for key in ("n1", "n2", "l1", "l2", "A", "E1", "E2", "e1", "e2"):
            if key not in doc:
                raise FileFormatError(f"game is missing '{key}'")
        A = SparseMatrix.from_dict(doc["A"])
        E1 = SparseMatrix.from_dict(doc["E1"])
        E2 = SparseMatrix.from_dict(doc["E2"])
        for vec in ("e1", "e2"):
            if not isinstance(doc[vec], list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in doc[vec]
            ):
                raise FileFormatError(f"'{vec}' must be a list of numbers")
        declared = (doc["n1"], doc["n2"], doc["l1"], doc["l2"])
        actual = (E1.cols, E2.cols, E1.rows, E2.rows)
        if declared != actual:
            raise FileFormatError(
                f"declared dimensions {declared} do not match matrices {actual}"
            )
        labels = doc.get("labels")
        if labels is not None and not isinstance(labels, dict):
            raise FileFormatError("'labels' must be an object when present")
        return cls(A=A, E1=E1, E2=E2,
                   e1=np.array(doc["e1"], dtype=np.float64),
                   e2=np.array(doc["e2"], dtype=np.float64),
                   labels=labels)


@dataclass(frozen=True)
class TreeplexIndex:
    """Preprocessed view of one player's constraint system.

    Information set i owns the sequences in children[i] and hangs off
    parent_seq[i]; in simplex mode there is a single information set
    with no parent. topo orders information sets parents first.
    """

    num_sequences: int
    simplex: bool
    parent_seq: tuple
    children: tuple
    topo: tuple
    player: Optional[int] = None

    @property
    def num_infosets(self) -> int:
        return len(self.children)


@dataclass(frozen=True, eq=False)
class RealizationPlan:
    """A point of a player's strategy polytope."""

    values: np.ndarray
    player: Optional[int] = None


class BestResponse(NamedTuple):
    value: float
    plan: RealizationPlan


class FeasibilityResiduals(NamedTuple):
    feas_x: float
    feas_y: float
    min_x: float
    min_y: float


def _nonzero_triplets(E: SparseMatrix):
    return [(r, c, v) for r, c, v in E.triplets() if v != 0.0]


def _is_simplex_row(E: SparseMatrix) -> bool:
    if E.rows != 1:
        return False
    entries = _nonzero_triplets(E)
    return len(entries) == E.cols and all(v == 1.0 for _, _, v in entries)


def _player_violations(E: SparseMatrix, e: np.ndarray, mat: str, vec: str) -> list[Violation]:
    out = []
    e = np.asarray(e, dtype=np.float64)
    if len(e) != E.rows:
        out.append(Violation(vec, "length", f"must have {E.rows} entries (one per row of {mat}), got {len(e)}"))
    if len(e) >= 1 and e[0] != 1.0:
        out.append(Violation(vec, "[0]", f"first entry must be 1, got {e[0]}"))
    for i in range(1, len(e)):
        if e[i] != 0.0:
            out.append(Violation(vec, f"[{i}]", f"entry must be 0, got {e[i]}"))

    entries = []
    for r, c, v in E.triplets():
        if v not in (-1.0, 0.0, 1.0):
            out.append(Violation(mat, f"({r},{c})", f"entries must be -1, 0, or +1, got {v}"))
        elif v != 0.0:
            entries.append((r, c, v))

    if _is_simplex_row(E):
        return out

    root = [(c, v) for r, c, v in entries if r == 0]
    if root != [(0, 1.0)]:
        out.append(Violation(mat, "row 0", "root row must contain a single +1 in column 0"))

    plus_rows: dict[int, list[int]] = {c: [] for c in range(E.cols)}
    neg_col: dict[int, int] = {}
    for r, c, v in entries:
        if v == 1.0:
            plus_rows[c].append(r)
    for r in range(1, E.rows):
        negs = [c for rr, c, v in entries if rr == r and v == -1.0]
        pos = [c for rr, c, v in entries if rr == r and v == 1.0]
        if len(negs) != 1:
            out.append(Violation(mat, f"row {r}", f"must contain exactly one -1, found {len(negs)}"))
        else:
            neg_col[r] = negs[0]
        if not pos:
            out.append(Violation(mat, f"row {r}", "must contain at least one +1"))
    for c in range(E.cols):
        if len(plus_rows[c]) != 1:
            out.append(Violation(mat, f"column {c}", f"must carry exactly one +1, found {len(plus_rows[c])}"))

    if out:
        return out

    # every row must reach row 0 through the parent-sequence chain
    owner = {c: rs[0] for c, rs in plus_rows.items()}
    status: dict[int, int] = {0: 1}  # 1 = reaches root, 2 = on current path
    for start in range(1, E.rows):
        if start in status:
            continue
        path = []
        r = start
        broken = None
        while r not in status:
            status[r] = 2
            path.append(r)
            r = owner[neg_col[r]]
            if status.get(r) == 2:
                broken = "parent chain forms a cycle"
                break
        if broken is None and status.get(r) != 1:
            broken = "parent chain does not reach the root row"
        for rr in path:
            status[rr] = 1 if broken is None else 3
        if broken is not None:
            out.append(Violation(mat, f"row {start}", broken))
    return out


def validate_sequence_form(game: SequenceFormGame) -> list[Violation]:
    """Check the structural rules of a sequence-form game.

    Returns a list of violations, empty when the game is well formed.
    """
    out = []
    out += _player_violations(game.E1, game.e1, "E1", "e1")
    out += _player_violations(game.E2, game.e2, "E2", "e2")
    if game.A.rows != game.E1.cols:
        out.append(Violation("A", "rows", f"must match the {game.E1.cols} player 1 sequences, got {game.A.rows}"))
    if game.A.cols != game.E2.cols:
        out.append(Violation("A", "cols", f"must match the {game.E2.cols} player 2 sequences, got {game.A.cols}"))
    return out


def build_treeplex_index(E: SparseMatrix, e, player: Optional[int] = None) -> TreeplexIndex:
    """Compile one player's constraints into a traversable index."""
    viols = _player_violations(E, np.asarray(e, dtype=np.float64), "E", "e")
    if viols:
        raise StructureError("; ".join(str(v) for v in viols))
    n = E.cols
    if _is_simplex_row(E):
        return TreeplexIndex(num_sequences=n, simplex=True, parent_seq=(None,),
                             children=(tuple(range(n)),), topo=(0,), player=player)
    entries = _nonzero_triplets(E)
    num_infosets = E.rows - 1
    parent_seq = [0] * num_infosets
    children: list[list[int]] = [[] for _ in range(num_infosets)]
    owner = {0: 0}
    for r, c, v in entries:
        if r == 0:
            continue
        if v == -1.0:
            parent_seq[r - 1] = c
        else:
            children[r - 1].append(c)
            owner[c] = r
    for cs in children:
        cs.sort()
    depth = {0: 0}

    def row_depth(r: int) -> int:
        chain = []
        while r not in depth:
            chain.append(r)
            r = owner[parent_seq[r - 1]]
        d = depth[r]
        for rr in reversed(chain):
            d += 1
            depth[rr] = d
        return d

    for r in range(1, E.rows):
        row_depth(r)
    topo = tuple(sorted(range(num_infosets), key=lambda i: (depth[i + 1], i)))
    return TreeplexIndex(num_sequences=n, simplex=False, parent_seq=tuple(parent_seq),
                         children=tuple(tuple(cs) for cs in children), topo=topo,
                         player=player)


def best_response(index: TreeplexIndex, gradient, sense: str = "max") -> BestResponse:
    """Optimize a linear functional over the polytope.

    Bottom-up dynamic programming over the information sets; the
    returned plan is a deterministic vertex (0/1 entries) attaining the
    optimum, with ties broken toward the lowest sequence index.
    """
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    g = np.asarray(gradient, dtype=np.float64)
    if g.shape != (index.num_sequences,):
        raise DimensionError(
            f"gradient must have length {index.num_sequences}, got shape {g.shape}"
        )
    take_max = sense == "max"
    val = g.copy()
    choice = [0] * index.num_infosets
    for i in reversed(index.topo):
        best = -1
        for c in index.children[i]:
            if best < 0 or (val[c] > val[best] if take_max else val[c] < val[best]):
                best = c
        choice[i] = best
        p = index.parent_seq[i]
        if p is not None:
            val[p] += val[best]

    plan = np.zeros(index.num_sequences)
    if index.simplex:
        plan[choice[0]] = 1.0
    else:
        plan[0] = 1.0
        for i in index.topo:
            mass = plan[index.parent_seq[i]]
            if mass != 0.0:
                plan[choice[i]] = mass
    value = float(np.dot(g, plan))
    return BestResponse(value, RealizationPlan(plan, index.player))


def normalize_to_polytope(index: TreeplexIndex, z) -> RealizationPlan:
    """Project a nonnegative-clipped vector back onto the polytope.

    Clips negatives, pins the root to one, and rescales each information
    set's sequences to carry exactly their parent's mass. An information
    set whose entries are all zero splits its parent mass uniformly. The
    result is always feasible, and feasible inputs pass through
    unchanged up to roundoff.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (index.num_sequences,):
        raise DimensionError(
            f"vector must have length {index.num_sequences}, got shape {z.shape}"
        )
    w = np.maximum(z, 0.0)
    if index.simplex:
        s = float(w.sum())
        if s > 0.0:
            out = w / s
        else:
            out = np.full(index.num_sequences, 1.0 / index.num_sequences)
        return RealizationPlan(out, index.player)
    out = np.zeros(index.num_sequences)
    out[0] = 1.0
    for i in index.topo:
        mass = out[index.parent_seq[i]]
        cs = list(index.children[i])
        s = float(w[cs].sum())
        if s > 0.0:
            for c in cs:
                out[c] = w[c] * (mass / s)
        else:
            share = mass / len(cs)
            for c in cs:
                out[c] = share
    return RealizationPlan(out, index.player)


def feasibility_residuals(game: SequenceFormGame, x, y) -> FeasibilityResiduals:
    """Constraint residuals (max-norm) and minimum entries of a strategy pair."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    feas_x = float(np.max(np.abs(game.E1.matvec(x) - game.e1)))
    feas_y = float(np.max(np.abs(game.E2.matvec(y) - game.e2)))
    return FeasibilityResiduals(feas_x=feas_x, feas_y=feas_y,
                                min_x=float(np.min(x)), min_y=float(np.min(y)))


def duality_gap(game: SequenceFormGame, x, y, feas_tol: float = 1e-8) -> float:
    """Sum of both players' best-response improvements at (x, y).

    Zero exactly at an equilibrium, and an upper bound on how much
    either player can gain by deviating. Meaningful for feasible
    strategies; noticeably infeasible inputs trigger a
    FeasibilityWarning but are still evaluated.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    res = feasibility_residuals(game, x, y)
    if max(res.feas_x, res.feas_y) > feas_tol or min(res.min_x, res.min_y) < -feas_tol:
        warnings.warn(
            f"duality gap evaluated at infeasible strategies (residuals {res.feas_x:.3g}, "
            f"{res.feas_y:.3g}, minima {res.min_x:.3g}, {res.min_y:.3g})",
            FeasibilityWarning, stacklevel=2)
    upper = best_response(game.index1, game.A.matvec(y), "max").value
    lower = best_response(game.index2, game.A.transpose_matvec(x), "min").value
    return upper - lower


def simplex_gap(A: SparseMatrix, x, y) -> float:
    """Duality gap specialized to matrix games over probability simplexes."""
    return float(np.max(A.matvec(y)) - np.min(A.transpose_matvec(x)))
