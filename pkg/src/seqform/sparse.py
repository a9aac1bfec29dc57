"""Sparse matrices and the product kernels the solver spends its time in.

Matrices are assembled from (row, col, value) triplets, with duplicate
coordinates summed, and compiled to a compressed-row layout. A second,
transposed layout is kept alongside so products against the transpose
have the same predictable cost as forward products. Instances are
immutable after construction and safe to share between solves.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np
import scipy.sparse

from .errors import DimensionError, FileFormatError, ValidationError

Triplet = tuple[int, int, float]

# Extra margin applied to rel_tol when testing successive estimates, so the
# returned value is comfortably inside the advertised accuracy.
_STOP_SAFETY = 0.005


class SparseMatrix:
    """Immutable sparse matrix with forward and transposed row layouts."""

    __slots__ = ("rows", "cols", "_fwd", "_tns")

    def __init__(self, rows: int, cols: int, triplets: Iterable[Triplet] = ()):
        rows = int(rows)
        cols = int(cols)
        if rows < 1 or cols < 1:
            raise ValueError(f"matrix shape must be at least 1x1, got {rows}x{cols}")
        trips = list(triplets)
        ri = np.fromiter((t[0] for t in trips), dtype=np.int64, count=len(trips))
        ci = np.fromiter((t[1] for t in trips), dtype=np.int64, count=len(trips))
        vals = np.fromiter((t[2] for t in trips), dtype=np.float64, count=len(trips))
        if len(trips):
            if ri.min() < 0 or ri.max() >= rows or ci.min() < 0 or ci.max() >= cols:
                raise ValueError("triplet index out of bounds")
            if not np.all(np.isfinite(vals)):
                raise ValueError("matrix values must be finite")
        self.rows = rows
        self.cols = cols
        coo = scipy.sparse.coo_matrix((vals, (ri, ci)), shape=(rows, cols))
        self._fwd = coo.tocsr()
        self._tns = self._fwd.T.tocsr()

    @classmethod
    def from_dense(cls, array) -> "SparseMatrix":
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("from_dense expects a 2-d array")
        rs, cs = np.nonzero(arr)
        trips = zip(rs.tolist(), cs.tolist(), arr[rs, cs].tolist())
        return cls(arr.shape[0], arr.shape[1], trips)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, [(i, i, 1.0) for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparseMatrix":
        return cls(rows, cols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return int(self._fwd.nnz)

    def matvec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.cols,):
            raise DimensionError(
                f"matvec expects a vector of length {self.cols}, got shape {v.shape}"
            )
        return self._fwd @ v

    def transpose_matvec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.rows,):
            raise DimensionError(
                f"transpose_matvec expects a vector of length {self.rows}, got shape {v.shape}"
            )
        return self._tns @ v

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, ((c, r, x) for r, c, x in self.triplets()))

    def scaled(self, factor: float) -> "SparseMatrix":
        return SparseMatrix(self.rows, self.cols, ((r, c, factor * x) for r, c, x in self.triplets()))

    def triplets(self) -> list[Triplet]:
        """Stored entries in row-major order with columns ascending."""
        m = self._fwd
        counts = np.diff(m.indptr)
        rs = np.repeat(np.arange(self.rows), counts)
        return list(zip(rs.tolist(), m.indices.tolist(), m.data.tolist()))

    def to_dense(self) -> np.ndarray:
        return self._fwd.toarray()

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "triplets": [[r, c, x] for r, c, x in self.triplets()],
        }

    @classmethod
    def from_dict(cls, doc) -> "SparseMatrix":
        if not isinstance(doc, dict):
            raise FileFormatError("sparse matrix must be a JSON object")
        for key in ("rows", "cols", "triplets"):
            if key not in doc:
                raise FileFormatError(f"sparse matrix is missing '{key}'")
        rows, cols = doc["rows"], doc["cols"]
        if not isinstance(rows, int) or not isinstance(cols, int):
            raise FileFormatError("sparse matrix 'rows' and 'cols' must be integers")
        trips = []
        for k, item in enumerate(doc["triplets"]):
            if not isinstance(item, (list, tuple)) or len(item) != 3:
                raise FileFormatError(f"triplet {k} must be [row, col, value]")
            r, c, x = item
            if not isinstance(r, int) or not isinstance(c, int):
                raise FileFormatError(f"triplet {k} has non-integer indices")
            trips.append((r, c, float(x)))
        try:
            return cls(rows, cols, trips)
        except ValueError as exc:
            raise FileFormatError(f"bad sparse matrix: {exc}") from None

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


class SpectralEstimate(NamedTuple):
    value: float
    converged: bool
    iterations: int


def spectral_norm(matrix: SparseMatrix, rel_tol: float = 1e-6,
                  max_iter: int = 5000, seed: int = 0) -> SpectralEstimate:
    """Estimate the largest singular value by power iteration.

    Runs the power method on the normal matrix, never forming it: each
    round is one forward and one transposed product. The iteration stops
    once successive estimates agree to within rel_tol (relative, with a
    floor of 1 on the scale), which for the matrices produced here gives
    at least rel_tol relative accuracy. Deterministic for a fixed seed.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(matrix.cols)
    w /= np.linalg.norm(w)
    estimate = 0.0
    retried = False
    for it in range(1, max_iter + 1):
        u = matrix.matvec(w)
        current = float(np.linalg.norm(u))
        if current == 0.0:
            # w landed in the null space; retry once for a nonzero matrix
            if matrix.nnz == 0 or retried:
                return SpectralEstimate(0.0, True, it)
            retried = True
            w = rng.standard_normal(matrix.cols)
            w /= np.linalg.norm(w)
            continue
        if it > 1 and abs(current - estimate) <= _STOP_SAFETY * rel_tol * max(current, 1.0):
            return SpectralEstimate(current, True, it)
        estimate = current
        w = matrix.transpose_matvec(u)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return SpectralEstimate(current, True, it)
        w /= nw
    return SpectralEstimate(estimate, False, max_iter)


def build_K(game) -> SparseMatrix:
    """Assemble the saddle-point operator [[A, -E1^T], [E2, 0]].

    The result has shape (n1 + l2) x (n2 + l1) and its norm sets the
    solver's step size. The game is validated first.
    """
    from .treeplex import validate_sequence_form

    violations = validate_sequence_form(game)
    if violations:
        raise ValidationError(violations)
    n1, n2 = game.n1, game.n2
    trips = list(game.A.triplets())
    trips += [(i, n2 + r, -x) for r, i, x in game.E1.triplets()]
    trips += [(n1 + r, j, x) for r, j, x in game.E2.triplets()]
    return SparseMatrix(n1 + game.l2, n2 + game.l1, trips)
