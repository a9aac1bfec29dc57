"""Brute-force reference computations for the test suite.

Everything here is deliberately naive and shares no code path with the
solver or the dynamic-programming best response: vertices are
enumerated, matrices are densified, trees are rolled out. Size guards
keep the enumeration honest about what it can check.
"""

from __future__ import annotations

import itertools
from math import prod
from typing import NamedTuple

import numpy as np

from .errors import SizeError, StrategyError
from .games import Chance, Decision, ExtensiveFormGame, SequenceMap, Terminal
from .sparse import SparseMatrix
from .treeplex import TreeplexIndex

MAX_VERTEX_COMBINATIONS = 10 ** 6
MAX_DENSE_CELLS = 64 * 64


def enumerate_vertices(index: TreeplexIndex, max_combinations: int = MAX_VERTEX_COMBINATIONS):
    """All vertices of the strategy polytope, deduplicated.

    Walks every combination of one action per information set and
    realizes it as a 0/1 plan; unreachable information sets make
    distinct combinations collapse to the same vertex, which is why the
    result is deduplicated. Raises SizeError when the combination count
    exceeds the guard.
    """
    counts = [len(cs) for cs in index.children]
    total = prod(counts) if counts else 1
    if total > max_combinations:
        raise SizeError(
            f"{total} action combinations exceed the enumeration guard of {max_combinations}")
    seen: dict[bytes, np.ndarray] = {}
    for combo in itertools.product(*(range(c) for c in counts)):
        plan = np.zeros(index.num_sequences)
        if index.simplex:
            plan[index.children[0][combo[0]]] = 1.0
        else:
            plan[0] = 1.0
            for i in index.topo:
                mass = plan[index.parent_seq[i]]
                if mass != 0.0:
                    plan[index.children[i][combo[i]]] = mass
        key = plan.tobytes()
        if key not in seen:
            seen[key] = plan
    return list(seen.values())


class TwoByTwoSolution(NamedTuple):
    value: float
    x: np.ndarray
    y: np.ndarray


def solve_2x2(A) -> TwoByTwoSolution:
    """Exact minimax solution of a 2x2 zero-sum game.

    Checks for a pure saddle point first (ties toward lower indexes),
    otherwise applies the closed-form mixed solution.
    """
    if isinstance(A, SparseMatrix):
        M = A.to_dense()
    else:
        M = np.asarray(A, dtype=np.float64)
    if M.shape != (2, 2):
        raise ValueError(f"solve_2x2 expects a 2x2 matrix, got shape {M.shape}")
    row_mins = M.min(axis=1)
    col_maxs = M.max(axis=0)
    maximin = row_mins.max()
    minimax = col_maxs.min()
    if maximin == minimax:
        i = int(np.argmax(row_mins))
        j = int(np.argmin(col_maxs))
        x = np.zeros(2)
        y = np.zeros(2)
        x[i] = 1.0
        y[j] = 1.0
        return TwoByTwoSolution(float(maximin), x, y)
    a, b = M[0, 0], M[0, 1]
    c, d = M[1, 0], M[1, 1]
    det = a - b - c + d
    x0 = (d - c) / det
    y0 = (d - b) / det
    value = (a * d - b * c) / det
    return TwoByTwoSolution(float(value),
                            np.array([x0, 1.0 - x0]),
                            np.array([y0, 1.0 - y0]))


def dense_spectral_norm(M) -> float:
    """Largest singular value via a dense symmetric eigendecomposition.

    Guarded to small matrices; the point is independence from the
    package's own power iteration, not speed.
    """
    if isinstance(M, SparseMatrix):
        if M.rows * M.cols > MAX_DENSE_CELLS:
            raise SizeError(
                f"{M.rows}x{M.cols} exceeds the dense guard of {MAX_DENSE_CELLS} cells")
        D = M.to_dense()
    else:
        D = np.asarray(M, dtype=np.float64)
        if D.ndim != 2:
            raise ValueError("expected a 2-d matrix")
        if D.shape[0] * D.shape[1] > MAX_DENSE_CELLS:
            raise SizeError(
                f"{D.shape[0]}x{D.shape[1]} exceeds the dense guard of {MAX_DENSE_CELLS} cells")
    eigs = np.linalg.eigvalsh(D.T @ D)
    top = float(eigs[-1])
    return float(np.sqrt(max(top, 0.0)))


def efg_rollout_value(efg: ExtensiveFormGame, pure1: dict, pure2: dict) -> float:
    """Expected payoff of a pure strategy pair by direct tree walk.

    pure1 and pure2 map information set ids to chosen action indexes.
    Every reached information set must be assigned.
    """

    def walk(node, prob):
        if isinstance(node, Terminal):
            return prob * node.payoff
        if isinstance(node, Chance):
            return sum(walk(child, prob * p) for p, child in node.outcomes)
        table = pure1 if node.player == 1 else pure2
        if node.infoset not in table:
            raise StrategyError(f"no action assigned for information set '{node.infoset}'")
        a = table[node.infoset]
        if not 0 <= a < len(node.actions):
            raise StrategyError(
                f"action {a} out of range for information set '{node.infoset}'")
        return walk(node.actions[a][1], prob)

    return float(walk(efg.root, 1.0))


def embed_pure_strategy(seqmap: SequenceMap, player: int, pure: dict) -> np.ndarray:
    """Realization plan (a 0/1 vertex) of a pure strategy.

    Built straight off the sequence map, independently of the treeplex
    traversal code.
    """
    entries = seqmap.sequences[player - 1]
    plan = np.zeros(len(entries))
    plan[0] = 1.0
    for idx in range(1, len(entries)):
        infoset, action, parent = entries[idx]
        if infoset not in pure:
            raise StrategyError(f"no action assigned for information set '{infoset}'")
        plan[idx] = plan[parent] if pure[infoset] == action else 0.0
    return plan


def embed_behavioral_strategy(seqmap: SequenceMap, player: int, behavior: dict) -> np.ndarray:
    """Realization plan of a behavioral strategy.

    behavior maps information set ids to per-action probability lists.
    """
    entries = seqmap.sequences[player - 1]
    plan = np.zeros(len(entries))
    plan[0] = 1.0
    for idx in range(1, len(entries)):
        infoset, action, parent = entries[idx]
        if infoset not in behavior:
            raise StrategyError(f"no probabilities for information set '{infoset}'")
        probs = behavior[infoset]
        if action >= len(probs):
            raise StrategyError(
                f"information set '{infoset}' needs at least {action + 1} action probabilities")
        plan[idx] = plan[parent] * float(probs[action])
    return plan
