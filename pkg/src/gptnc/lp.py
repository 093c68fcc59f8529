"""Feasibility of ``A x = b, x >= 0`` with certificates.

The exact path is a dense phase-one tableau simplex over Fractions using
Bland's rule, so it terminates and its answers are exact.  On infeasible
input it returns a Farkas vector ``y`` with ``y @ A >= 0`` and ``y @ b < 0``.
The float path delegates to HiGHS through :func:`scipy.optimize.linprog`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
from scipy.optimize import linprog

from . import linalg as la


@dataclass
class LPResult:
    feasible: bool
    x: np.ndarray | None = None
    farkas: np.ndarray | None = None
    pivots: int = 0

    @property
    def support(self) -> list[int]:
        if self.x is None:
            return []
        return [j for j, v in enumerate(self.x) if v != 0]


def feasible(A: Any, b: Any, tol: float | None = None, columns: Sequence[int] | None = None) -> LPResult:
    """Decide feasibility of ``A x = b, x >= 0``.

    ``columns`` restricts the variables that may be nonzero; the returned
    ``x`` and certificate still refer to all columns of ``A``.
    """
    if tol is None:
        return _exact_feasible(la.exact(A), la.exact(b), columns)
    return _float_feasible(la.to_float(A), la.to_float(b), tol, columns)


def _exact_feasible(A: np.ndarray, b: np.ndarray, columns) -> LPResult:
    m, n_all = A.shape
    cols = list(range(n_all)) if columns is None else sorted(columns)
    sgn = [Fraction(-1) if bi < 0 else Fraction(1) for bi in b]
    n = len(cols)
    # tableau rows: [A' | I | b'], one artificial per row
    T = [[sgn[i] * A[i, j] for j in cols] + [Fraction(int(i == k)) for k in range(m)] + [sgn[i] * b[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    width = n + m
    # reduced costs of the phase-one objective (sum of artificials)
    cost = [-sum(T[i][j] for i in range(m)) for j in range(n)] + [Fraction(0)] * m
    pivots = 0
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][width] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # phase one is bounded below by zero
            raise RuntimeError("unbounded phase-one problem")
        piv = T[leave][enter]
        row = [x / piv for x in T[leave]]
        T[leave] = row
        for i in range(m):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [x - f * y for x, y in zip(T[i], row)]
        f = cost[enter]
        cost = [c - f * y for c, y in zip(cost, row[:width])]
        basis[leave] = enter
        pivots += 1
    obj = sum(T[i][width] for i, bv in enumerate(basis) if bv >= n)
    if obj == 0:
        x = la.zeros(n_all, None)
        for i, bv in enumerate(basis):
            if bv < n:
                x[cols[bv]] = T[i][width]
        return LPResult(True, x=x, pivots=pivots)
    # phase-one duals: reduced cost of artificial k is 1 - y_k
    y = np.array([Fraction(1) - cost[n + k] for k in range(m)], dtype=object)
    farkas = np.array([-sgn[i] * y[i] for i in range(m)], dtype=object)
    return LPResult(False, farkas=farkas, pivots=pivots)


def _float_feasible(A: np.ndarray, b: np.ndarray, tol: float, columns) -> LPResult:
    m, n_all = A.shape
    cols = list(range(n_all)) if columns is None else sorted(columns)
    sub = A[:, cols]
    res = linprog(np.zeros(len(cols)), A_eq=sub, b_eq=b, bounds=(0, None), method="highs")
    if res.status == 0:
        xs = _polish(sub, b, res.x, tol)
        if xs is not None:
            x = np.zeros(n_all)
            x[cols] = xs
            return LPResult(True, x=x)
    # Farkas system: y @ A >= 0 on allowed columns, y @ b = -1
    res = linprog(
        np.zeros(m),
        A_ub=-sub.T,
        b_ub=np.zeros(len(cols)),
        A_eq=b.reshape(1, -1),
        b_eq=[-1.0],
        bounds=(None, None),
        method="highs",
    )
    return LPResult(False, farkas=res.x if res.status == 0 else None)


def _polish(A: np.ndarray, b: np.ndarray, x: np.ndarray, tol: float) -> np.ndarray | None:
    """Re-solve ``A x = b`` on the support of ``x`` by least squares.

    Interior-point and simplex codes stop at residuals near 1e-8; a basic
    solution re-solved on its support is accurate to rounding.
    """
    support = x > tol
    y = np.zeros_like(x)
    if support.any():
        y[support], *_ = np.linalg.lstsq(A[:, support], b, rcond=None)
    if y.min(initial=0.0) >= -tol and np.max(np.abs(A @ y - b), initial=0.0) <= tol:
        return np.maximum(y, 0.0)
    if np.max(np.abs(A @ x - b), initial=0.0) <= tol:
        return np.where(x > tol, x, 0.0)
    return None


def verify_farkas(A: Any, b: Any, y: Any, tol: float | None = None, columns=None) -> bool:
    """Check ``y @ A[:, cols] >= 0`` and ``y @ b < 0``."""
    A = la.coerce(A, tol)
    b = la.coerce(b, tol)
    y = la.coerce(y, tol)
    cols = list(range(A.shape[1])) if columns is None else list(columns)
    lhs = y @ A[:, cols]
    return all(la.sign(v, tol) >= 0 for v in lhs) and la.sign(y @ b, tol) < 0
