"""Linear algebra over two scalar backends.

Exact mode stores matrices as numpy ``object`` arrays of
:class:`fractions.Fraction`; float mode uses ``float64``.  Every routine
takes ``tol``: ``None`` selects exact arithmetic, a number selects float
arithmetic with that absolute zero threshold.
"""
from __future__ import annotations

import math
import os
from fractions import Fraction
from functools import reduce
from typing import Any, Iterable

import numpy as np

DEFAULT_TOL = float(os.environ.get("GPTNC_TOL", "1e-9"))


def to_fraction(x: Any) -> Fraction:
    """Convert a scalar to a Fraction; floats go through their shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite scalar {x!r}")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def exact(a: Any) -> np.ndarray:
    """Return ``a`` as an object array of Fractions."""
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = to_fraction(x)
    return out


def to_float(a: Any) -> np.ndarray:
    arr = np.asarray(a, dtype=object) if _has_strings(a) else np.asarray(a)
    if arr.dtype == object:
        return np.vectorize(lambda x: float(to_fraction(x)), otypes=[float])(arr) if arr.size else arr.astype(float)
    return arr.astype(float)


def _has_strings(a: Any) -> bool:
    if isinstance(a, str):
        return True
    if isinstance(a, np.ndarray):
        return False
    if isinstance(a, (list, tuple)):
        return any(_has_strings(x) for x in a)
    return False


def is_exact(a: np.ndarray) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def coerce(a: Any, tol: float | None) -> np.ndarray:
    """Bring ``a`` into the backend selected by ``tol``."""
    return exact(a) if tol is None else to_float(a)


def zeros(shape, tol: float | None) -> np.ndarray:
    if tol is None:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def eye(n: int, tol: float | None) -> np.ndarray:
    out = zeros((n, n), tol)
    for i in range(n):
        out[i, i] = Fraction(1) if tol is None else 1.0
    return out


def iszero(x, tol: float | None) -> bool:
    return x == 0 if tol is None else abs(x) <= tol


def sign(x, tol: float | None) -> int:
    if iszero(x, tol):
        return 0
    return 1 if x > 0 else -1


def rref(M: Any, tol: float | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    A = coerce(M, tol).copy()
    if A.ndim != 2:
        raise ValueError("rref expects a matrix")
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        if tol is None:
            p = next((i for i in range(r, rows) if A[i, c] != 0), None)
        else:
            i = r + int(np.argmax(np.abs(A[r:, c])))
            p = i if abs(A[i, c]) > tol else None
        if p is None:
            continue
        if p != r:
            A[[r, p]] = A[[p, r]]
        A[r] = A[r] / A[r, c]
        for i in range(rows):
            if i != r and not iszero(A[i, c], tol if tol is None else 0.0):
                A[i] = A[i] - A[i, c] * A[r]
        if tol is not None:
            A[np.abs(A) <= tol * 1e-3] = 0.0
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M: Any, tol: float | None = None) -> int:
    A = coerce(M, tol)
    if A.size == 0:
        return 0
    if tol is not None:
        s = np.linalg.svd(A, compute_uv=False)
        return int(np.sum(s > tol))
    return len(rref(A, tol)[1])


def nullspace(M: Any, tol: float | None = None) -> np.ndarray:
    """Basis of {x : M x = 0}, one basis vector per row."""
    A = coerce(M, tol)
    n = A.shape[1]
    if tol is not None:
        if A.shape[0] == 0:
            return np.eye(n)
        _, s, vt = np.linalg.svd(A)
        r = int(np.sum(s > tol))
        return vt[r:].copy()
    R, piv = rref(A, tol)
    free = [c for c in range(n) if c not in piv]
    basis = zeros((len(free), n), tol)
    for k, f in enumerate(free):
        basis[k, f] = Fraction(1)
        for i, p in enumerate(piv):
            basis[k, p] = -R[i, f]
    return basis


def row_basis(M: Any, tol: float | None = None) -> np.ndarray:
    """Orthonormal (float) or rref (exact) basis of the row space."""
    A = coerce(M, tol)
    if tol is not None:
        if A.shape[0] == 0:
            return np.zeros((0, A.shape[1]))
        _, s, vt = np.linalg.svd(A)
        return vt[: int(np.sum(s > tol))].copy()
    R, piv = rref(A, tol)
    return R[: len(piv)].copy()


def solve(A: Any, B: Any, tol: float | None = None) -> np.ndarray | None:
    """A solution X of ``A @ X = B`` or None if the system is inconsistent.

    With a nontrivial kernel the free variables are set to zero (exact) or
    the minimum-norm solution is returned (float).
    """
    A = coerce(A, tol)
    B = coerce(B, tol)
    vec = B.ndim == 1
    if vec:
        B = B.reshape(-1, 1)
    if tol is not None:
        X, *_ = np.linalg.lstsq(A, B, rcond=None)
        if np.max(np.abs(A @ X - B), initial=0.0) > tol * max(1.0, np.max(np.abs(B), initial=0.0)) * 10:
            return None
        return X.ravel() if vec else X
    n = A.shape[1]
    aug = np.concatenate([A, B], axis=1)
    R, piv = rref(aug, None)
    if any(p >= n for p in piv):
        return None
    X = zeros((n, B.shape[1]), None)
    for i, p in enumerate(piv):
        X[p] = R[i, n:]
    return X.ravel() if vec else X


def inv(A: Any, tol: float | None = None) -> np.ndarray:
    A = coerce(A, tol)
    if A.shape[0] != A.shape[1]:
        raise ValueError("matrix is not square")
    if tol is not None:
        return np.linalg.inv(A)
    X = solve(A, eye(A.shape[0], None), None)
    if X is None or rank(A, None) < A.shape[0]:
        raise np.linalg.LinAlgError("singular matrix")
    return X


def rank_factorization(M: Any, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return (C, R) with ``M = C @ R`` and inner dimension ``rank(M)``."""
    A = coerce(M, tol)
    if tol is not None:
        u, s, vt = np.linalg.svd(A, full_matrices=False)
        r = int(np.sum(s > tol))
        return u[:, :r] * s[:r], vt[:r]
    R, piv = rref(A, None)
    return A[:, piv].copy(), R[: len(piv)].copy()


def left_inverse(B: Any, tol: float | None = None) -> np.ndarray:
    """L with ``L @ B = I`` for a matrix of full column rank."""
    B = coerce(B, tol)
    if tol is not None:
        return np.linalg.pinv(B)
    return inv(B.T @ B, None) @ B.T


def complete_basis(rows: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Extend independent ``rows`` with standard basis vectors to a square basis."""
    rows = coerce(rows, tol)
    n = rows.shape[1]
    basis = list(rows)
    I = eye(n, tol)
    for i in range(n):
        if len(basis) == n:
            break
        trial = np.array(basis + [I[i]], dtype=rows.dtype)
        if rank(trial, tol) == len(basis) + 1:
            basis.append(I[i])
    return np.array(basis, dtype=rows.dtype)


def primitive(v: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Positive rescaling of ``v`` to a canonical representative.

    Exact: primitive integer vector.  Float: unit Euclidean norm.
    """
    if tol is not None:
        n = float(np.linalg.norm(v))
        return v / n if n > 0 else v
    dens = [x.denominator for x in v if x != 0]
    if not dens:
        return v
    lcm = reduce(lambda a, b: a * b // math.gcd(a, b), dens, 1)
    ints = [int(x * lcm) for x in v]
    g = reduce(math.gcd, (abs(i) for i in ints if i), 0) or 1
    return np.array([Fraction(i // g) for i in ints], dtype=object)


def key(v: np.ndarray, tol: float | None = None) -> tuple:
    """Hashable key for deduplication."""
    if tol is None:
        return tuple(v)
    q = max(tol, 1e-12) * 10
    return tuple(round(float(x) / q) for x in v)


def scalar_to_json(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    return float(x)


def to_jsonable(a: Any):
    arr = np.asarray(a, dtype=object) if not isinstance(a, np.ndarray) else a
    if arr.ndim == 0:
        return scalar_to_json(arr.item())
    return [to_jsonable(x) for x in arr]


def from_jsonable(data: Iterable, tol: float | None = None) -> np.ndarray:
    """Parse nested lists; strings are exact, numbers are floats unless exact mode."""
    arr = np.asarray(data, dtype=object)
    if tol is None and _all_exact_parsable(arr):
        return exact(arr)
    return to_float(arr)


def _all_exact_parsable(arr: np.ndarray) -> bool:
    return all(isinstance(x, (str, int, Fraction, np.integer)) for x in arr.ravel())
