"""Convex bodies and cones: duality, ray enumeration, shape recognition.

Representation conversion uses the double description method with the
combinatorial adjacency test.  All routines work in exact rational mode
(``tol=None``) or float mode (``tol`` a positive threshold).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from . import linalg as la
from .errors import (
    CenterOutsideBody,
    DegenerateBody,
    DimensionMismatch,
    NotPointed,
    UnnormalizedBody,
)

__all__ = [
    "ConvexBody",
    "Cone",
    "affine_hull",
    "canonicalize",
    "dual_body",
    "extremal_rays",
    "is_simplex",
    "is_hypercube",
    "shrink_toward",
    "expand_from",
    "vertices_from_inequalities",
    "same_set",
    "contains_points",
]


# ---------------------------------------------------------------------------
# double description


def _dd(A: np.ndarray, tol: float | None) -> list[np.ndarray]:
    """Extremal rays of the pointed cone ``{x : A @ x >= 0}``."""
    m, n = A.shape
    if tol is not None:
        norms = np.linalg.norm(A, axis=1)
        keep = norms > tol
        A = A[keep] / norms[keep, None]
        m = A.shape[0]
    basis_rows: list[int] = []
    for i in range(m):
        if la.rank(A[basis_rows + [i]], tol) == len(basis_rows) + 1:
            basis_rows.append(i)
            if len(basis_rows) == n:
                break
    if len(basis_rows) < n:
        raise NotPointed("constraint matrix has a nontrivial kernel; the cone contains a line")
    binv = la.inv(A[basis_rows], tol)
    rays = [la.primitive(binv[:, j], tol) for j in range(n)]
    zsets = [frozenset(r for k, r in enumerate(basis_rows) if k != j) for j in range(n)]
    done = set(basis_rows)
    for i in range(m):
        if i in done:
            continue
        a = A[i]
        vals = [a @ r for r in rays]
        pos = [k for k, v in enumerate(vals) if la.sign(v, tol) > 0]
        neg = [k for k, v in enumerate(vals) if la.sign(v, tol) < 0]
        zer = [k for k, v in enumerate(vals) if la.sign(v, tol) == 0]
        if not neg:
            zsets = [z | {i} if k in zer else z for k, z in enumerate(zsets)]
            done.add(i)
            continue
        new_rays, new_z = [], []
        for p in pos:
            for q in neg:
                common = zsets[p] & zsets[q]
                if len(common) < n - 2:
                    continue
                if any(k != p and k != q and common <= zsets[k] for k in range(len(rays))):
                    continue
                r = vals[p] * rays[q] - vals[q] * rays[p]
                new_rays.append(la.primitive(r, tol))
                new_z.append(common | {i})
        rays = [rays[k] for k in pos] + [rays[k] for k in zer] + new_rays
        zsets = [zsets[k] for k in pos] + [zsets[k] | {i} for k in zer] + new_z
        done.add(i)
    out, seen = [], set()
    for r in rays:
        k = la.key(r, tol)
        if k not in seen:
            seen.add(k)
            out.append(r)
    return out


def affine_hull(points: np.ndarray, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(origin, D)`` with every point equal to ``origin + y @ D``.

    ``D`` has independent rows; its row count is the intrinsic dimension.
    """
    P = la.coerce(points, tol)
    if P.shape[0] == 0:
        raise DegenerateBody("empty point set")
    origin = P[0].copy()
    D = la.row_basis(P - origin, tol)
    return origin, D


def _coords(P: np.ndarray, origin: np.ndarray, D: np.ndarray, tol: float | None) -> np.ndarray:
    if tol is not None:
        return (P - origin) @ D.T
    _, piv = la.rref(D, None)
    return (P - origin)[:, piv]


def _lift_normal(z: np.ndarray, D: np.ndarray, tol: float | None) -> np.ndarray:
    """Ambient covector ``a`` with ``a @ x == z @ coords(x)`` on the hull."""
    if tol is not None:
        return z @ D
    _, piv = la.rref(D, None)
    a = la.zeros(D.shape[1], None)
    for zi, p in zip(z, piv):
        a[p] = zi
    return a


def _dedupe(P: np.ndarray, tol: float | None) -> np.ndarray:
    seen, keep = set(), []
    for i, p in enumerate(P):
        k = la.key(p, tol)
        if k not in seen:
            seen.add(k)
            keep.append(i)
    return P[keep]


def _hull(points, tol):
    """Vertices and irredundant H-representation of ``conv(points)``."""
    P = _dedupe(la.coerce(points, tol), tol)
    n = P.shape[1]
    origin, D = affine_hull(P, tol)
    k = D.shape[0]
    eq_normals = la.nullspace(D, tol) if k < n else la.zeros((0, n), tol)
    eq_offsets = eq_normals @ origin
    if k == 0:
        return P[:1], (la.zeros((0, n), tol), la.zeros(0, tol)), (eq_normals, eq_offsets)
    Y = _coords(P, origin, D, tol)
    one = Fraction(1) if tol is None else 1.0
    lifted = np.concatenate([np.full((len(Y), 1), one, dtype=Y.dtype), Y], axis=1)
    zs = _dd(lifted, tol)
    Z = np.array(zs, dtype=lifted.dtype)
    slack = lifted @ Z.T
    vert = []
    for i in range(len(P)):
        tight = [j for j in range(len(zs)) if la.iszero(slack[i, j], tol)]
        if (la.rank(Z[tight], tol) if tight else 0) == k:
            vert.append(i)
    V = P[vert]
    normals = np.array([-_lift_normal(z[1:], D, tol) for z in zs], dtype=P.dtype)
    offsets = np.array([z[0] - _lift_normal(z[1:], D, tol) @ origin for z in zs], dtype=P.dtype)
    order = sorted(range(len(V)), key=lambda i: tuple(V[i]))
    return V[order], (normals, offsets), (eq_normals, eq_offsets)


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """A polytope given by its vertices and, optionally, its facets.

    ``facets`` holds ``(normals, offsets)`` meaning ``normals @ x <= offsets``;
    ``equalities`` holds ``(normals, offsets)`` cutting out the affine hull.
    ``tol`` is ``None`` for exact bodies.
    """

    vertices: np.ndarray
    facets: tuple[np.ndarray, np.ndarray] | None = None
    equalities: tuple[np.ndarray, np.ndarray] | None = None
    tol: float | None = None

    @classmethod
    def from_points(cls, points: Any, tol: float | None = None) -> "ConvexBody":
        """Canonical body: duplicates and non-extreme points removed, sorted."""
        P = la.coerce(points, tol)
        if P.ndim != 2 or P.shape[0] == 0:
            raise DegenerateBody("need a nonempty list of points")
        V, F, E = _hull(P, tol)
        return cls(V, F, E, tol)

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def exact(self) -> bool:
        return self.tol is None

    def __len__(self) -> int:
        return self.vertices.shape[0]

    @property
    def intrinsic_dim(self) -> int:
        return affine_hull(self.vertices, self.tol)[1].shape[0]

    def barycenter(self) -> np.ndarray:
        return self.vertices.sum(axis=0) / (Fraction(len(self)) if self.exact else len(self))

    def with_hrep(self) -> "ConvexBody":
        if self.facets is not None and self.equalities is not None:
            return self
        return ConvexBody.from_points(self.vertices, self.tol)

    def contains(self, x: Any) -> bool:
        b = self.with_hrep()
        x = la.coerce(x, self.tol)
        tol = self.tol
        slack_tol = None if tol is None else tol * 10
        A, c = b.facets
        if len(A) and any(la.sign(v, slack_tol) > 0 for v in A @ x - c):
            return False
        A, c = b.equalities
        return not (len(A) and any(not la.iszero(v, slack_tol) for v in A @ x - c))

    def to_json(self) -> dict:
        out = {"dim": self.ambient_dim, "vertices": la.to_jsonable(self.vertices)}
        if self.facets is not None:
            out["facets"] = [
                {"normal": la.to_jsonable(a), "offset": la.scalar_to_json(c)}
                for a, c in zip(*self.facets)
            ]
        if self.equalities is not None and len(self.equalities[0]):
            out["equalities"] = [
                {"normal": la.to_jsonable(a), "offset": la.scalar_to_json(c)}
                for a, c in zip(*self.equalities)
            ]
        return out

    @classmethod
    def from_json(cls, data: dict, tol: float | None = None) -> "ConvexBody":
        V = la.from_jsonable(data["vertices"], tol)
        if V.ndim != 2 or V.shape[1] != data.get("dim", V.shape[1]):
            raise DimensionMismatch("vertex length disagrees with 'dim'")
        body_tol = None if la.is_exact(V) else (tol if tol is not None else la.DEFAULT_TOL)
        return cls.from_points(V, body_tol)


@dataclass(frozen=True, eq=False)
class Cone:
    """A polyhedral cone by generators (``rays``) or by ``facet_normals``
    (inequalities ``normal @ x >= 0``)."""

    ambient_dim: int
    rays: np.ndarray | None = None
    facet_normals: np.ndarray | None = None
    tol: float | None = None


# ---------------------------------------------------------------------------
# operations


def extremal_rays(cone: Cone, tol: float | None = None) -> list[np.ndarray]:
    """Minimal generating set of a pointed cone, rays scaled canonically.

    Raises NotPointed if the cone contains a line.
    """
    tol = cone.tol if tol is None else tol
    n = cone.ambient_dim
    if cone.facet_normals is not None:
        A = la.coerce(cone.facet_normals, tol)
        if A.shape[1] != n:
            raise DimensionMismatch("facet normals do not match ambient dimension")
        return sorted(_dd(A, tol), key=lambda r: tuple(r))
    if cone.rays is None:
        raise ValueError("cone needs rays or facet normals")
    G = la.coerce(cone.rays, tol)
    if G.shape[1] != n:
        raise DimensionMismatch("rays do not match ambient dimension")
    G = np.array([g for g in G if any(not la.iszero(x, tol) for x in g)], dtype=G.dtype)
    if len(G) == 0:
        return []
    D = la.row_basis(G, tol)
    r = D.shape[0]
    origin = la.zeros(n, tol)
    C = _coords(G, origin, D, tol)
    F = np.array(_dd(C, tol), dtype=C.dtype)
    if la.rank(F, tol) < r:
        raise NotPointed("generators contain a line")
    slack = C @ F.T
    out, seen = [], set()
    for g, row in zip(G, slack):
        tight = [j for j in range(len(F)) if la.iszero(row[j], tol)]
        if (la.rank(F[tight], tol) if tight else 0) == r - 1:
            p = la.primitive(g, tol)
            k = la.key(p, tol)
            if k not in seen:
                seen.add(k)
                out.append(p)
    return sorted(out, key=lambda v: tuple(v))


def canonicalize(body: ConvexBody) -> ConvexBody:
    return ConvexBody.from_points(body.vertices, body.tol)


def vertices_from_inequalities(
    A: Any,
    b: Any,
    Aeq: Any = None,
    beq: Any = None,
    tol: float | None = None,
) -> np.ndarray:
    """Vertices of the bounded polyhedron ``{x : A x <= b, Aeq x = beq}``.

    Returns an empty array when the set is empty; raises DegenerateBody when
    it is unbounded.
    """
    A = la.coerce(A, tol)
    b = la.coerce(b, tol)
    n = A.shape[1]
    if Aeq is not None and len(Aeq):
        Aeq = la.coerce(Aeq, tol)
        beq = la.coerce(beq, tol)
        x0 = la.solve(Aeq, beq, tol)
        if x0 is None:
            return la.zeros((0, n), tol)
        N = la.nullspace(Aeq, tol).T
    else:
        x0 = la.zeros(n, tol)
        N = la.eye(n, tol)
    k = N.shape[1]
    bb = b - A @ x0
    if k == 0:
        ok = all(la.sign(v, tol) >= 0 for v in bb)
        return x0.reshape(1, n) if ok else la.zeros((0, n), tol)
    AN = A @ N
    if la.rank(AN, tol) < k:
        raise DegenerateBody("inequalities do not bound the set")
    one = Fraction(1) if tol is None else 1.0
    rows = np.concatenate([bb.reshape(-1, 1), -AN], axis=1)
    t_row = la.zeros((1, k + 1), tol)
    t_row[0, 0] = one
    rays = _dd(np.concatenate([t_row, rows]), tol)
    verts = []
    for r in rays:
        if la.sign(r[0], tol) > 0:
            verts.append(x0 + N @ (r[1:] / r[0]))
        elif any(not la.iszero(v, tol) for v in r):
            raise DegenerateBody("inequalities do not bound the set")
    if not verts:
        return la.zeros((0, n), tol)
    return np.array(verts, dtype=A.dtype)


def dual_body(body: ConvexBody, unit: Any, tol: float | None = None) -> ConvexBody:
    """``{x : <x, s> in [0, 1] for all s in body}`` within ``span(body)``.

    When ``body`` spans the ambient space this is the full dual; otherwise
    the component orthogonal to the span is unconstrained and dropped.
    """
    tol = body.tol if tol is None else tol
    u = la.coerce(unit, tol)
    S = la.coerce(body.vertices, tol)
    if u.shape != (S.shape[1],):
        raise DimensionMismatch("unit and body live in different dimensions")
    norm_tol = None if tol is None else tol * 10
    for s in S:
        if not la.iszero(u @ s - 1, norm_tol):
            raise UnnormalizedBody(f"vertex {la.to_jsonable(s)} has <unit, s> != 1")
    n = S.shape[1]
    A = np.concatenate([S, -S])
    one = Fraction(1) if tol is None else 1.0
    b = np.array([one] * len(S) + [0 * one] * len(S), dtype=A.dtype)
    span_rank = la.rank(S, tol)
    if span_rank < n:
        perp = la.nullspace(S, tol)
        V = vertices_from_inequalities(A, b, perp, la.zeros(len(perp), tol), tol)
    else:
        V = vertices_from_inequalities(A, b, tol=tol)
    return ConvexBody.from_points(V, tol)


def is_simplex(body: ConvexBody) -> bool:
    if len(body) == 0:
        raise DegenerateBody("empty body")
    b = canonicalize(body)
    return len(b) == b.intrinsic_dim + 1


def _incidence(body: ConvexBody):
    b = body.with_hrep()
    A, c = b.facets
    tol = b.tol
    slack_tol = None if tol is None else tol * 10
    slack = b.vertices @ A.T - c if len(A) else la.zeros((len(b), 0), tol)
    return b, [frozenset(j for j in range(len(A)) if la.iszero(slack[i, j], slack_tol)) for i in range(len(b))]


def is_hypercube(body: ConvexBody) -> bool:
    """True iff ``body`` is affinely isomorphic to ``[0, 1]^k``, k its intrinsic dimension.

    The candidate map sends the unit vectors to the edge directions at one
    vertex; it is then checked on every vertex.
    """
    if len(body) == 0:
        raise DegenerateBody("empty body")
    b, tight = _incidence(canonicalize(body))
    tol = b.tol
    k = b.intrinsic_dim
    if len(b) != 2 ** k or len(b.facets[0]) != 2 * k:
        return False
    if k == 0:
        return True
    v0 = b.vertices[0]
    nbrs = []
    for w in range(1, len(b)):
        common = tight[0] & tight[w]
        if not any(x not in (0, w) and common <= tight[x] for x in range(len(b))):
            nbrs.append(w)
    if len(nbrs) != k:
        return False
    D = np.array([b.vertices[w] - v0 for w in nbrs], dtype=b.vertices.dtype)
    if la.rank(D, tol) != k:
        return False
    hit = set()
    for x in b.vertices:
        c = la.solve(D.T, x - v0, tol)
        if c is None:
            return False
        bits = []
        for ci in c:
            if la.iszero(ci, tol):
                bits.append(0)
            elif la.iszero(ci - 1, tol):
                bits.append(1)
            else:
                return False
        hit.add(tuple(bits))
    return len(hit) == 2 ** k


def shrink_toward(body: ConvexBody, center: Any, r: Any) -> ConvexBody:
    """Replace each vertex ``v`` by ``(1 - r) v + r center``."""
    tol = body.tol
    c = la.coerce(center, tol)
    r = la.to_fraction(r) if tol is None else float(r)
    if not 0 <= r <= 1:
        raise ValueError("r must lie in [0, 1]")
    if not body.contains(c):
        raise CenterOutsideBody("center is not inside the body")
    if r == 1:
        return ConvexBody.from_points(c.reshape(1, -1), tol)
    V = (1 - r) * body.vertices + r * c
    facets = None
    if body.facets is not None:
        A, off = body.facets
        facets = (A, (1 - r) * off + r * (A @ c))
    return ConvexBody(V, facets, body.equalities, tol)


def expand_from(body: ConvexBody, center: Any, r: Any) -> ConvexBody:
    """Scale the body by ``1 + r`` about ``center``; the inverse of shrinking."""
    tol = body.tol
    c = la.coerce(center, tol)
    r = la.to_fraction(r) if tol is None else float(r)
    if r < 0:
        raise ValueError("r must be nonnegative")
    V = (1 + r) * body.vertices - r * c
    facets = None
    if body.facets is not None:
        A, off = body.facets
        facets = (A, (1 + r) * off - r * (A @ c))
    return ConvexBody(V, facets, body.equalities, tol)


def contains_points(body: ConvexBody, points: Any) -> bool:
    return all(body.contains(p) for p in la.coerce(points, body.tol))


def same_set(a: ConvexBody, b: ConvexBody, tol: float | None = None) -> bool:
    """Set equality: canonical vertex sets (exact) or vertex Hausdorff distance <= tol."""
    if a.ambient_dim != b.ambient_dim:
        return False
    tol = tol if tol is not None else (a.tol if a.tol is not None else b.tol)
    if tol is None and a.exact and b.exact:
        ca, cb = canonicalize(a), canonicalize(b)
        return len(ca) == len(cb) and all(tuple(x) == tuple(y) for x, y in zip(ca.vertices, cb.vertices))
    A = la.to_float(canonicalize(a).vertices)
    B = la.to_float(canonicalize(b).vertices)
    d = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    return max(d.min(axis=1).max(), d.min(axis=0).max()) <= tol


def facet_distance(body: ConvexBody, point: Any) -> Any:
    """Smallest facet slack at ``point`` measured along unit normals (float)."""
    b = body.with_hrep()
    A = la.to_float(b.facets[0])
    c = la.to_float(b.facets[1])
    x = la.to_float(point)
    if len(A) == 0:
        return float("inf")
    # normals are only meaningful inside the affine hull; project them onto it
    E = la.to_float(b.equalities[0])
    if len(E):
        Q = la.row_basis(E, 1e-12)
        A = A - (A @ Q.T) @ Q
    norms = np.linalg.norm(A, axis=1)
    return float(np.min((c - A @ x) / norms))
