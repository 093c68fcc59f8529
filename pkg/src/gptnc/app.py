"""Noise-robust classicality verdicts from probability tables.

An entrywise uncertainty ``epsilon`` on the table is turned into radii by
bounding how far the true theory's vertices can sit from the point
estimate's.  The inner approximation (bodies contracted by those radii)
sits inside every compatible GPT and the outer approximation (bodies
dilated, then cut down to what is valid against the inner bodies)
contains every compatible GPT.  Since sub-theories of an embeddable theory
are embeddable, a non-embeddable inner approximation proves
nonclassicality and an embeddable outer one proves classicality.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import linalg as la
from .embed import Embeddable, NotEmbeddable, decide
from .errors import InconsistentTable, MalformedInput, NormalizationViolation
from .geometry import ConvexBody, facet_distance, vertices_from_inequalities
from .gpt import Gpt, canonical_simplicial
from .quotient import OperationalTheory, Relations, quotient_to_gpt, read_relations, read_table_csv

log = logging.getLogger(__name__)

__all__ = [
    "NoisyTable",
    "Nonclassical",
    "Classical",
    "Inconclusive",
    "ingest",
    "depolarize",
    "robustness_radius",
    "PointEstimate",
    "point_gpt",
    "noise_radii",
    "noise_radius",
    "shrink",
    "grow",
    "rank_report",
    "verdict",
]


@dataclass(frozen=True, eq=False)
class NoisyTable:
    """Point estimates with an absolute entrywise uncertainty."""

    theory: OperationalTheory
    epsilon: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")

    @property
    def table(self) -> np.ndarray:
        return self.theory.table


@dataclass
class Nonclassical:
    margin: float
    r_eps: float
    r_star: float
    inner: Gpt
    certificate: NotEmbeddable
    exit_code = 3
    label = "Nonclassical"

    def to_json(self) -> dict:
        return {"verdict": self.label, "margin": self.margin, "r_eps": self.r_eps, "r_star": self.r_star,
                "farkas": la.to_jsonable(self.certificate.certificate)}


@dataclass
class Classical:
    margin: float
    r_eps: float
    outer: Gpt
    witness: Embeddable
    exit_code = 0
    label = "Classical"

    def to_json(self) -> dict:
        return {"verdict": self.label, "margin": self.margin, "r_eps": self.r_eps,
                **{k: v for k, v in self.witness.to_json().items() if k != "embeddable"}}


@dataclass
class Inconclusive:
    gap: float
    r_eps: float
    reasons: list[str] = field(default_factory=list)
    exit_code = 4
    label = "Inconclusive"

    def to_json(self) -> dict:
        return {"verdict": self.label, "gap": self.gap, "r_eps": self.r_eps, "reasons": self.reasons}


RobustVerdict = Nonclassical | Classical | Inconclusive


# ---------------------------------------------------------------------------
# ingestion


def ingest(
    csv: Any,
    relations: Any = None,
    epsilon: float = 0.0,
    tol: float | None = None,
) -> tuple[OperationalTheory, NoisyTable]:
    """Read a table; with ``epsilon == 0`` it is read exactly.

    Normalization may fail by up to ``epsilon`` per outcome before
    NormalizationViolation is raised.
    """
    if epsilon < 0:
        raise MalformedInput("epsilon must be nonnegative")
    rel = relations if isinstance(relations, Relations) else read_relations(relations)
    mode = None if epsilon == 0 and tol is None else (tol if tol is not None else la.DEFAULT_TOL)
    t = read_table_csv(csv, rel, mode, check=False)
    for m, outcomes in t.measurements:
        sums = t.table[t.rows_of(m)].sum(axis=0)
        limit = len(outcomes) * epsilon
        for s in sums:
            if mode is None and epsilon == 0 and s != 1:
                raise NormalizationViolation(f"outcomes of {m!r} sum to {s}")
            if mode is not None and abs(float(s) - 1) > limit + mode:
                raise NormalizationViolation(f"outcomes of {m!r} sum to {float(s):.6g}, beyond epsilon")
    try:
        t.check(slack=2 * epsilon * max(1, len(t.preps)) if epsilon else 0.0)
    except InconsistentTable as exc:
        raise MalformedInput(str(exc)) from exc
    return t, NoisyTable(t, float(epsilon))


def rank_report(nt: NoisyTable, tol: float) -> tuple[int, list[float]]:
    """Numerical rank of the table at ``tol`` and all singular values."""
    s = np.linalg.svd(la.to_float(nt.table), compute_uv=False)
    return int(np.sum(s > tol)), [float(x) for x in s]


# ---------------------------------------------------------------------------
# approximations


def _scalar(r: Any, g: Gpt):
    return la.to_fraction(r) if g.exact else float(r)


def depolarize(g: Gpt, r: Any) -> Gpt:
    """States shrunk toward their barycenter ``c``; effects mapped by
    ``e -> (1 - r) e + r <e, c> u``, which fixes 0 and u."""
    r = _scalar(r, g)
    if not 0 <= r <= 1:
        raise ValueError("r must lie in [0, 1]")
    c = g.states.barycenter()
    S = (1 - r) * g.states.vertices + r * c
    E = g.effects.vertices
    E = (1 - r) * E + r * np.outer(E @ c, g.unit)
    return Gpt.build(S, E, g.unit, tol=g.tol, meta={"depolarized": float(r)}, add_trivial=False)


def _embeddable(g: Gpt) -> bool:
    return decide(g).embeddable


def robustness_radius(g: Gpt, precision: float = 1e-3) -> float:
    """Smallest depolarizing radius making ``g`` embeddable, to ``precision``.

    Bisection over dyadic radii (exact when ``g`` is exact).  The returned
    value is the upper end of the final bracket, so the GPT is embeddable
    at the returned radius and not embeddable ``precision`` below it.
    """
    if _embeddable(g):
        return 0.0
    lo, hi = Fraction(0), Fraction(1)
    while hi - lo > precision:
        mid = (lo + hi) / 2
        if _embeddable(depolarize(g, mid)):
            hi = mid
        else:
            lo = mid
    return float(hi)


@dataclass(frozen=True)
class PointEstimate:
    """GPT of the point estimates and displacement bounds for the true theory.

    Under the hypothesis that the true table has rank ``gpt.dim``, there is
    a gauge in which every true state vertex lies within ``d_states`` of
    the corresponding point state and every true effect within
    ``d_effects`` of its point effect, with the unit fixed at ``e0``.
    """

    gpt: Gpt
    d_states: float
    d_effects: float
    simplex: bool = False

    @property
    def rank(self) -> int:
        return self.gpt.dim


def _project_normalized(T: np.ndarray, t: OperationalTheory) -> np.ndarray:
    """Orthogonal projection of each measurement block onto ``sum = 1``."""
    T = T.copy()
    for m, _ in t.measurements:
        idx = t.rows_of(m)
        T[idx] -= (T[idx].sum(axis=0) - 1) / len(idx)
    return T


def point_gpt(nt: NoisyTable, tol: float | None = None) -> PointEstimate:
    """Point-estimate GPT and displacement bounds.

    Exact tables with ``epsilon == 0`` go through the exact quotient.  Noisy
    tables are projected onto exact normalization, the centered columns are
    truncated at ``max(tol, eps sqrt(K P))`` and the remaining directions
    are whitened, which keeps both bodies well conditioned.
    """
    t, eps = nt.theory, nt.epsilon
    if t.exact and eps == 0:
        g, _ = quotient_to_gpt(t)
        return PointEstimate(g, 0.0, 0.0, len(t.preps) == g.dim or g.dim <= 2)
    tol = tol if tol is not None else (t.tol or la.DEFAULT_TOL)
    D = _project_normalized(la.to_float(t.table), t)
    K, P = D.shape
    cbar = D.mean(axis=1)
    U, sv, _ = np.linalg.svd(D - cbar[:, None], full_matrices=False)
    cut = max(tol, eps * math.sqrt(K * P))
    k = int(np.sum(sv > cut))
    W = U[:, :k]
    scale = sv[:k] / math.sqrt(P)
    Z = (W.T @ (D - cbar[:, None])) / scale[:, None]
    S = np.hstack([np.ones((P, 1)), Z.T])
    E = np.hstack([cbar[:, None], W * scale])
    That = E @ S.T
    col_res = np.linalg.norm(D - That, axis=0)
    row_res = np.linalg.norm(D - That, axis=1)
    # true states in the gauge fixed by the left inverse of E (unit row kept)
    Q = np.linalg.pinv(E)[1:]
    ds_each = np.linalg.norm(Q, 2) * (eps * math.sqrt(K) + col_res)
    b = float(np.linalg.norm(ds_each))
    sigma = float(np.linalg.norm(np.linalg.pinv(S), 2))
    if sigma * b >= 1:
        de = math.inf
    else:
        de_each = sigma * (2 * eps * math.sqrt(P) + row_res + b * np.linalg.norm(E, axis=1)) / (1 - sigma * b)
        de = float(np.max(de_each))
    unit = np.zeros(k + 1)
    unit[0] = 1.0
    g = Gpt.build(S, E, unit, tol=tol, meta={"source": "noisy table", "rank": k + 1})
    return PointEstimate(g, float(np.max(ds_each)), de, P == k + 1 or k + 1 <= 2)


def _radius(body: ConvexBody, d: float) -> float:
    if d == 0:
        return 0.0
    rho = facet_distance(body, la.to_float(body.barycenter()))
    return 1.0 if rho <= d else d / rho


def noise_radii(pe: PointEstimate) -> tuple[float, float]:
    """Relative radii ``d / rho`` for states and effects, capped at 1.

    ``rho`` is the distance from a body's barycenter to its boundary, so a
    body contracted by ``d / rho`` about the barycenter stays at least ``d``
    inside every body within Hausdorff distance ``d``.
    """
    return _radius(pe.gpt.states, pe.d_states), _radius(pe.gpt.effects, pe.d_effects)


def noise_radius(pe: PointEstimate) -> float:
    return max(noise_radii(pe))


def _homothety(V: np.ndarray, c: np.ndarray, f: Any) -> np.ndarray:
    return f * V + (1 - f) * c


def shrink(g: Gpt, r_s: Any, r_e: Any) -> Gpt:
    """Both bodies contracted about their barycenters; 0 and u are kept."""
    r_s, r_e = _scalar(r_s, g), _scalar(r_e, g)
    S = _homothety(g.states.vertices, g.states.barycenter(), 1 - r_s)
    E = _homothety(g.effects.vertices, g.effects.barycenter(), 1 - r_e)
    return Gpt.build(S, E, g.unit, tol=g.tol, meta={"shrunk": [float(r_s), float(r_e)]})


def grow(g: Gpt, r_s: Any, r_e: Any, inner: Gpt | None = None) -> Gpt:
    """Both bodies dilated about their barycenters, each then cut down to
    the points that are valid against the other's ``inner`` body."""
    r_s, r_e = _scalar(r_s, g), _scalar(r_e, g)
    inner = inner if inner is not None else shrink(g, r_s, r_e)
    tol = g.tol
    S = _homothety(g.states.vertices, g.states.barycenter(), 1 + r_s)
    E = _homothety(g.effects.vertices, g.effects.barycenter(), 1 + r_e)
    S = _clip(S, inner.effects.vertices, tol, g.unit)
    E = _clip(E, inner.states.vertices, tol, None)
    return Gpt.build(S, E, g.unit, tol=tol, meta={"grown": [float(r_s), float(r_e)]})


def _clip(V: np.ndarray, duals: np.ndarray, tol: float | None, unit: Any) -> np.ndarray:
    """Vertices of ``conv(V)`` intersected with ``0 <= <d, x> <= 1`` for all
    ``d`` in ``duals`` (and ``<u, x> = 1`` when ``unit`` is given)."""
    body = ConvexBody.from_points(V, tol)
    A, b = body.facets
    Aeq, beq = body.equalities
    one = Fraction(1) if tol is None else 1.0
    n = len(duals)
    A = np.concatenate([A, duals, -duals])
    b = np.concatenate([b, la.coerce([one] * n, tol), la.zeros(n, tol)])
    if unit is not None:
        Aeq = np.concatenate([Aeq, la.coerce(unit, tol).reshape(1, -1)]) if len(Aeq) else la.coerce(unit, tol).reshape(1, -1)
        beq = np.concatenate([beq, la.coerce([one], tol)]) if len(beq) else la.coerce([one], tol)
    return vertices_from_inequalities(A, b, Aeq if len(Aeq) else None, beq if len(Aeq) else None, tol)


def _bisect(test, lo: Fraction, hi: Fraction, precision: float) -> Fraction:
    """Largest ``t`` in ``[lo, hi]`` with ``test(t)``, assuming ``test(lo)`` and monotonicity."""
    if test(hi):
        return hi
    while hi - lo > precision:
        mid = (lo + hi) / 2
        if test(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _frac(x: float) -> Fraction:
    return Fraction(x).limit_denominator(2**20)


def verdict(nt: NoisyTable, relations: Relations | None = None, tol: float | None = None, precision: float = 1e-3) -> RobustVerdict:
    """Nonclassical, Classical or Inconclusive for the data in ``nt``.

    Nonclassical carries a Farkas certificate for the inner approximation;
    Classical carries a witness for the outer one.  For noisy tables both
    are conditional on the true table having the rank of the point estimate.
    """
    if relations is not None:
        nt = NoisyTable(OperationalTheory.create(nt.theory.preps, nt.theory.effect_labels, nt.theory.table,
                                                 relations, nt.theory.tol), nt.epsilon)
    pe = point_gpt(nt, tol)
    g = pe.gpt
    r_s, r_e = noise_radii(pe)
    r_eps = max(r_s, r_e)
    conv = _frac if g.exact else float
    inner = shrink(g, conv(r_s), conv(r_e))
    v_in = decide(inner)
    if isinstance(v_in, NotEmbeddable):
        reach = _bisect(lambda x: not _embeddable(shrink(g, x, x)), _frac(r_eps), Fraction(1), precision)
        return Nonclassical(max(float(reach) - r_eps, 0.0), r_eps, robustness_radius(g, precision), inner, v_in)
    if pe.simplex:
        # the true states form a simplex: rank equals the number of
        # preparations, or rank <= 2 where every state space is a segment
        outer = canonical_simplicial(g.dim)
        return Classical(1.0 - r_eps, r_eps, outer, decide(outer))
    reasons = []
    if r_eps < 1:
        outer = grow(g, conv(r_s), conv(r_e), inner)
        v_out = decide(outer)
        if isinstance(v_out, Embeddable):
            reach = _bisect(lambda x: _embeddable(grow(g, x, x)), _frac(r_eps), Fraction(1), precision)
            return Classical(max(float(reach) - r_eps, 0.0), r_eps, outer, v_out)
        reasons.append("outer approximation is not embeddable")
    else:
        reasons.append("noise radius reaches the whole state or effect body")
    if _embeddable(g):
        reach = _bisect(lambda x: _embeddable(grow(g, x, x)), Fraction(0), Fraction(1), precision)
    else:
        reach = _bisect(lambda x: not _embeddable(shrink(g, x, x)), Fraction(0), Fraction(1), precision)
    return Inconclusive(max(r_eps - float(reach), 0.0), r_eps, reasons)
