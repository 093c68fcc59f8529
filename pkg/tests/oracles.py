"""Independent reference computations used by the tests.

Nothing here calls into the double description code: vertices are found by
brute force over constraint subsets, probabilities by traces of 2x2
matrices.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np

from gptnc import linalg as la
from gptnc.geometry import ConvexBody, dual_body
from gptnc.gpt import Gpt


def brute_force_vertices(A, b, tol=1e-9):
    """Vertices of ``{x : A x <= b}`` by solving every square subsystem."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    out = []
    for rows in combinations(range(len(A)), n):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ x <= b + tol) and not any(np.allclose(x, y, atol=1e-7) for y in out):
            out.append(x)
    return np.array(out)


def brute_force_dual(states):
    """Vertices of ``{x : 0 <= <x, s> <= 1}`` for full-rank ``states``."""
    S = np.asarray(la.to_float(states))
    return brute_force_vertices(np.vstack([S, -S]), np.concatenate([np.ones(len(S)), np.zeros(len(S))]))


def same_points(P, Q, atol=1e-7):
    P, Q = np.asarray(P, float), np.asarray(Q, float)
    if P.shape != Q.shape:
        return False
    return all(np.min(np.linalg.norm(Q - p, axis=1)) < atol for p in P) and all(
        np.min(np.linalg.norm(P - q, axis=1)) < atol for q in Q
    )


# -- qubit traces ------------------------------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=float)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=float)


def projector(vec):
    v = np.asarray(vec, dtype=float)
    v = v / np.linalg.norm(v)
    return np.outer(v, v)


REBIT_KETS = {"0": (1, 0), "1": (0, 1), "+": (1, 1), "-": (1, -1)}


def rebit_state_coords(rho):
    """(t, x, z) with rho = (t I + x X + z Z) / 2."""
    return np.array([np.trace(rho), np.trace(PAULI_X @ rho), np.trace(PAULI_Z @ rho)])


def rebit_effect_coords(E):
    """(a, b, c) with E = a I + b X + c Z."""
    return np.array([np.trace(E), np.trace(PAULI_X @ E), np.trace(PAULI_Z @ E)]) / 2


def rebit_trace_table():
    """Effects x states table of tr(E rho) over projectors plus 0 and identity."""
    effects = [np.zeros((2, 2)), np.eye(2)] + [projector(k) for k in REBIT_KETS.values()]
    states = [projector(k) for k in REBIT_KETS.values()]
    return effects, states, np.array([[np.trace(E @ r) for r in states] for E in effects])


# -- random GPTs ---------------------------------------------------------------


def random_states(rng, n, max_extra=3, box=3):
    """Integer points on the hyperplane x0 = 1 whose hull is full-dimensional."""
    while True:
        k = n + int(rng.integers(0, max_extra + 1))
        pts = [[1] + [int(x) for x in rng.integers(-box, box + 1, size=n - 1)] for _ in range(k)]
        if np.linalg.matrix_rank(np.array(pts, dtype=float)) == n:
            return la.exact(pts)


def random_no_restriction(rng, n):
    states = ConvexBody.from_points(random_states(rng, n))
    unit = la.exact([1] + [0] * (n - 1))
    return Gpt(states, dual_body(states, unit), unit, {"name": "random"})


def random_suite(count=200, seed=20240611):
    rng = np.random.default_rng(seed)
    return [random_no_restriction(rng, 2 + i % 3) for i in range(count)]


def rebit_table_csv(duplicate=True, mixture=True):
    """Rebit preparations against Z, X, a trivial and a coin measurement."""
    rows = {
        "0": ["1", "0", "1/2", "1/2"],
        "1": ["0", "1", "1/2", "1/2"],
        "+": ["1/2", "1/2", "1", "0"],
        "-": ["1/2", "1/2", "0", "1"],
    }
    if duplicate:
        rows["0b"] = rows["0"]
    if mixture:
        rows["mix"] = ["1/2", "1/2", "1/2", "1/2"]
    header = "prep,0|Z,1|Z,+|X,-|X,yes|T,no|T,h|C,t|C"
    lines = [header] + [",".join([p, *r, "1", "0", "1/2", "1/2"]) for p, r in rows.items()]
    return "\n".join(lines) + "\n"


def half():
    return Fraction(1, 2)
