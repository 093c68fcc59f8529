"""Quasiprobability representations of a GPT.

A representation sends states to real functions on a finite set that sum
to one and effects to real functions that sum to one over any measurement,
reproducing every probability.  When all values lie in [0, 1] the data is
literally an ontological model, and the two conversions below are the
identity on matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, NamedTuple, Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, NotIdentityDecomposition, NotPositive
from .gpt import Gpt
from .models import OntologicalModel

__all__ = [
    "QuasiRep",
    "Negativity",
    "from_decomposition",
    "is_positive",
    "negativity",
    "from_model",
    "to_model",
    "default_measurements",
    "check_measurements",
    "minimize_negativity",
]


@dataclass(frozen=True, eq=False)
class QuasiRep:
    """``mu_hat @ s`` and ``xi_hat @ e`` are the quasi-distributions and
    quasi-response functions; ``gpt`` is the theory they represent, if known."""

    mu_hat: np.ndarray
    xi_hat: np.ndarray
    gpt: Gpt | None = None

    @property
    def d(self) -> int:
        return self.mu_hat.shape[0]

    @property
    def exact(self) -> bool:
        return la.is_exact(self.mu_hat)

    def state_values(self, g: Gpt | None = None) -> np.ndarray:
        g = _gpt(self, g)
        return g.states.vertices @ self.mu_hat.T

    def effect_values(self, g: Gpt | None = None) -> np.ndarray:
        g = _gpt(self, g)
        return g.effects.vertices @ self.xi_hat.T

    def violations(self, g: Gpt | None = None, measurements: Sequence[Sequence[Any]] | None = None, tol: float | None = None) -> list[str]:
        g = _gpt(self, g)
        tol = _tol(self, g, tol)
        M, X = la.coerce(self.mu_hat, tol), la.coerce(self.xi_hat, tol)
        if M.shape[1] != g.dim or X.shape != M.shape:
            return ["shape"]
        S, E = la.coerce(g.states.vertices, tol), la.coerce(g.effects.vertices, tol)
        bad = []
        if any(not la.iszero(t - 1, tol) for t in (S @ M.T).sum(axis=1)):
            bad.append("mu_normalized")
        if not check_measurements(self, g, measurements, tol):
            bad.append("measurement_normalized")
        if any(not la.iszero(x, tol) for x in ((E @ X.T) @ (S @ M.T).T - E @ S.T).ravel()):
            bad.append("reproduces_probabilities")
        return bad

    def to_json(self) -> dict:
        return {"d": self.d, "mu_hat": la.to_jsonable(self.mu_hat), "xi_hat": la.to_jsonable(self.xi_hat)}

    @classmethod
    def from_json(cls, data: dict, g: Gpt | None = None) -> "QuasiRep":
        return cls(la.from_jsonable(data["mu_hat"]), la.from_jsonable(data["xi_hat"]), g)


class Negativity(NamedTuple):
    state: Any
    effect: Any

    @property
    def total(self) -> Any:
        return self.state + self.effect


def _gpt(q: QuasiRep, g: Gpt | None) -> Gpt:
    g = g if g is not None else q.gpt
    if g is None:
        raise ValueError("representation is not attached to a GPT; pass one explicitly")
    return g


def _tol(q: QuasiRep, g: Gpt, tol: float | None) -> float | None:
    if tol is not None:
        return tol
    return None if q.exact and g.exact else la.DEFAULT_TOL


def from_decomposition(g: Gpt, pairs: Sequence[tuple[Any, Any]], tol: float | None = None) -> QuasiRep:
    """Representation with ``mu_hat(s)(l) = <h_l, s>`` and ``xi_hat(e)(l) = <e, v_l>``.

    ``pairs`` are ``(v, h)``; ``sum v h^T`` must act as the identity on the
    span of the states and every ``v`` must satisfy ``<u, v> = 1``.
    """
    tol = g.tol if tol is None else tol
    if not pairs:
        raise NotIdentityDecomposition("empty decomposition")
    V = la.coerce([p[0] for p in pairs], tol)
    H = la.coerce([p[1] for p in pairs], tol)
    if V.shape[1] != g.dim or H.shape != V.shape:
        raise DimensionMismatch("pair vectors do not live in the GPT's space")
    S = la.coerce(g.states.vertices, tol)
    u = la.coerce(g.unit, tol)
    if any(not la.iszero(x - 1, tol) for x in V @ u):
        raise NotIdentityDecomposition("some v has <u, v> != 1")
    if any(not la.iszero(x, tol) for x in (V.T @ (H @ S.T) - S.T).ravel()):
        raise NotIdentityDecomposition("sum of v h^T is not the identity on the state span")
    return QuasiRep(H, V, g)


def is_positive(q: QuasiRep, tol: float | None = None, g: Gpt | None = None) -> bool:
    """All quasi-probabilities in [0, 1] on state and effect vertices."""
    g = _gpt(q, g)
    tol = _tol(q, g, tol)
    vals = np.concatenate([q.state_values(g).ravel(), q.effect_values(g).ravel()])
    return all(la.sign(x, tol) >= 0 and la.sign(x - 1, tol) <= 0 for x in vals)


def negativity(q: QuasiRep, g: Gpt | None = None) -> Negativity:
    """Largest total negative mass over state vertices, and over effect
    vertices (for effects, excess above 1 counts too)."""
    g = _gpt(q, g)
    zero = la.to_fraction(0) if q.exact and g.exact else 0.0

    def neg(x):
        return -x if x < 0 else zero

    def over(x):
        return x - 1 if x > 1 else zero

    S = q.state_values(g)
    E = q.effect_values(g)
    ns = max((sum((neg(x) for x in row), zero) for row in S), default=zero)
    ne = max((sum((neg(x) + over(x) for x in row), zero) for row in E), default=zero)
    return Negativity(ns, ne)


def from_model(m: OntologicalModel, g: Gpt | None = None) -> QuasiRep:
    return QuasiRep(m.mu_map.copy(), m.xi_map.copy(), g)


def to_model(q: QuasiRep, g: Gpt | None = None, tol: float | None = None) -> OntologicalModel:
    if not is_positive(q, tol, g):
        raise NotPositive("representation takes values outside [0, 1]")
    return OntologicalModel(q.mu_hat.copy(), q.xi_hat.copy())


def default_measurements(g: Gpt) -> list[list[np.ndarray]]:
    """``{u}`` plus ``{e, u - e}`` for every effect vertex whose complement is an effect."""
    u = g.unit
    out = [[u]]
    for e in g.effects.vertices:
        c = u - e
        if g.effects.contains(c) and not all(la.iszero(x, g.tol) for x in e):
            out.append([e, c])
    return out


def check_measurements(q: QuasiRep, g: Gpt | None = None, measurements: Sequence[Sequence[Any]] | None = None, tol: float | None = None) -> bool:
    """``sum_{e in chi} xi_hat(e) == 1`` pointwise for every measurement ``chi``.

    Measurements whose effects do not sum to the unit are rejected with
    ValueError.  The defaults of :func:`default_measurements` are always included.
    """
    g = _gpt(q, g)
    tol = _tol(q, g, tol)
    X = la.coerce(q.xi_hat, tol)
    u = la.coerce(g.unit, tol)
    chis = default_measurements(g) + [list(m) for m in (measurements or [])]
    for chi in chis:
        total = sum(la.coerce(e, tol) for e in chi)
        if any(not la.iszero(x, tol) for x in total - u):
            raise ValueError("measurement effects do not sum to the unit effect")
        if any(not la.iszero(x - 1, tol) for x in X @ total):
            return False
    return True


# ---------------------------------------------------------------------------
# heuristic


def _negativity_lp(V, fixed, target, ones_row, ones_rhs, upper):
    """One factor ``F`` (d x r) with ``fixed^T F = target`` and the linear
    normalization ``ones_row``, minimizing the L1 mass of ``V F^T`` outside
    ``[0, inf)`` (or ``[0, 1]`` when ``upper``)."""
    from scipy.optimize import linprog

    d, r = fixed.shape
    nv = len(V)
    nf = d * r
    ns = nv * d * (2 if upper else 1)
    # equations fixed^T F = target: sum_lam fixed[lam, a] F[lam, b] = target[a, b]
    Aeq = np.zeros((r * r + len(ones_rhs), nf + ns))
    beq = np.zeros(r * r + len(ones_rhs))
    for a in range(r):
        for b in range(r):
            Aeq[a * r + b, [lam * r + b for lam in range(d)]] = fixed[:, a]
            beq[a * r + b] = target[a, b]
    Aeq[r * r :, :nf] = ones_row
    beq[r * r :] = ones_rhs
    # V[j] . F[lam] + t >= 0 and, for effects, V[j] . F[lam] - t' <= 1
    Aub = np.zeros((ns, nf + ns))
    bub = np.zeros(ns)
    k = 0
    for j in range(nv):
        for lam in range(d):
            Aub[k, lam * r : lam * r + r] = -V[j]
            Aub[k, nf + k] = -1
            k += 1
            if upper:
                Aub[k, lam * r : lam * r + r] = V[j]
                Aub[k, nf + k] = -1
                bub[k] = 1
                k += 1
    c = np.concatenate([np.zeros(nf), np.ones(ns)])
    bounds = [(None, None)] * nf + [(0, None)] * ns
    res = linprog(c, Aub, bub, Aeq, beq, bounds=bounds, method="highs")
    if res.status != 0:
        return None
    return res.x[:nf].reshape(d, r)


def minimize_negativity(
    g: Gpt,
    d: int,
    seed: int | None = 0,
    restarts: int = 10,
    iters: int = 50,
) -> tuple[QuasiRep, Negativity]:
    """Float heuristic: alternating linear programs.

    Each step fixes one factor and minimizes the L1 negativity of the
    other subject to exact reproduction and normalization, so every iterate
    is a representation and the objective never increases.  The result has
    small negativity; it is not a certificate that no smaller one exists.
    """
    from .embed import _random_vertex, reduce_gpt

    gf = g.as_float() if g.exact else g
    red = reduce_gpt(gf)
    S, E, u = (la.to_float(x) for x in (red.states, red.effects, red.unit))
    Ps, Pe = la.to_float(red.state_map), la.to_float(red.effect_map)
    r = S.shape[1]
    if d < r:
        raise ValueError(f"d = {d} is below the dimension {r}")
    I = np.eye(r)
    # 1^T M = u and X u = 1
    m_norm = np.kron(np.ones((1, d)), np.eye(r))
    x_norm = np.kron(np.eye(d), u[None, :])
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        # response functions start at random vertices of the effect-dual body
        rows = [_random_vertex(E, u, rng) for _ in range(d)]
        if any(x is None for x in rows):
            continue
        X = np.array(rows)
        if np.linalg.matrix_rank(X) < r:
            continue
        q = None
        prev = np.inf
        for _ in range(iters):
            M = _negativity_lp(S, X, I, m_norm, u, False)
            if M is None:
                break
            X_new = _negativity_lp(E, M, I, x_norm, np.ones(d), True)
            if X_new is None:
                break
            X = X_new
            q = QuasiRep(M @ Ps, X @ Pe, gf)
            total = negativity(q, gf).total
            if total < 1e-9 or total > prev - 1e-9:
                break
            prev = total
        if q is None:
            continue
        neg = negativity(q, gf)
        if best is None or neg.total < best[1].total:
            best = (q, neg)
        if best[1].total < 1e-9:
            break
    if best is None:
        raise RuntimeError("no representation found")
    return best
