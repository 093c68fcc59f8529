"""Simplex-embeddability: exact decision, witnesses, models and bounds.

Any ontological model of a GPT has the form
``mu_s(lambda) = <h_lambda, s>`` with ``h_lambda`` in the dual of the state
cone and ``xi_e(lambda) = <e, v_lambda>`` with ``v_lambda`` in

    K_E = {v : <e, v> in [0, 1] for all effects e, <u, v> = 1},

and it reproduces the probability rule iff ``sum v_lambda h_lambda^T`` acts
as the identity on the state span.  Expanding every ``v`` over the vertices
``V_i`` of ``K_E`` and every ``h`` over the extremal rays ``H_j`` of the dual
cone turns existence of a model into feasibility of

    sum_ij alpha_ij V_i H_j^T = I,   alpha >= 0,

a linear program with ``dim^2`` equality rows.  A basic solution therefore
uses at most ``dim^2`` pairs.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy.optimize import linprog

from . import linalg as la
from . import lp
from .errors import DimensionMismatch, NonPolytopic, NumericalInstability
from .geometry import Cone, extremal_rays, vertices_from_inequalities
from .gpt import Gpt
from .models import EmbeddingWitness, OntologicalModel

log = logging.getLogger(__name__)

__all__ = [
    "Reduction",
    "PairDecomposition",
    "Embeddable",
    "NotEmbeddable",
    "reduce_gpt",
    "pair_decomposition",
    "decide",
    "verify_witness",
    "verify_certificate",
    "witness_to_model",
    "model_to_witness",
    "model_from_decomposition",
    "min_d_lower_bound",
    "kill_set_size",
    "bilinear_search",
    "minimize_support",
    "EmbeddingWitness",
    "OntologicalModel",
]


@dataclass(frozen=True, eq=False)
class Reduction:
    """Coordinates in which states and effects both span ``R^r``.

    ``<e, s> == (effect_map @ e) . (state_map @ s)`` for every state ``s``
    and effect ``e`` of the original GPT.
    """

    state_map: np.ndarray
    effect_map: np.ndarray
    states: np.ndarray
    effects: np.ndarray
    unit: np.ndarray
    full: bool

    @property
    def r(self) -> int:
        return self.state_map.shape[0]


@dataclass(frozen=True, eq=False)
class PairDecomposition:
    """``V_list`` are vertices of ``K_E``, ``H_list`` extremal rays of the dual
    state cone (reduced coordinates); ``alpha`` weights their outer products."""

    V_list: np.ndarray
    H_list: np.ndarray
    alpha: np.ndarray | None
    reduction: Reduction

    def columns(self) -> np.ndarray:
        """LP matrix: column ``i * len(H) + j`` is ``vec(V_i H_j^T)``."""
        V, H = self.V_list, self.H_list
        cols = [np.outer(v, h).ravel() for v in V for h in H]
        r = self.reduction.r
        if not cols:
            return la.zeros((r * r, 0), _tol(V))
        return np.array(cols, dtype=V.dtype).T

    def rhs(self) -> np.ndarray:
        return la.eye(self.reduction.r, _tol(self.V_list)).ravel()

    @property
    def support(self) -> list[tuple[int, int]]:
        if self.alpha is None:
            return []
        return [(i, j) for (i, j), a in np.ndenumerate(self.alpha) if a != 0]

    def residual(self) -> np.ndarray:
        """``sum alpha_ij V_i H_j^T - I``."""
        return (self.columns() @ self.alpha.ravel() - self.rhs()).reshape(self.reduction.r, -1)


def _tol(arr: np.ndarray) -> float | None:
    return None if la.is_exact(arr) else la.DEFAULT_TOL


@dataclass
class Embeddable:
    witness: EmbeddingWitness
    model: OntologicalModel
    decomposition: PairDecomposition
    warnings: list[str] = field(default_factory=list)
    embeddable = True

    @property
    def d(self) -> int:
        return self.witness.d

    def to_json(self) -> dict:
        return {"embeddable": True, **self.witness.to_json(), "support": len(self.decomposition.support)}


@dataclass
class NotEmbeddable:
    """``certificate`` is a Farkas vector ``y`` (length ``r^2``): it is
    nonnegative on every LP column and negative on the identity."""

    certificate: np.ndarray
    decomposition: PairDecomposition
    warnings: list[str] = field(default_factory=list)
    embeddable = False

    def certificate_matrix(self) -> np.ndarray:
        r = self.decomposition.reduction.r
        return self.certificate.reshape(r, r)

    def to_json(self) -> dict:
        return {"embeddable": False, "farkas": la.to_jsonable(self.certificate)}


Verdict = Embeddable | NotEmbeddable


# ---------------------------------------------------------------------------
# reduction and LP construction


def _coord_map(B: np.ndarray, tol: float | None) -> np.ndarray:
    """Linear map sending a vector of ``rowspan(B)`` to its coordinates in ``B``."""
    if tol is not None:
        return B
    _, piv = la.rref(B, None)
    L = la.zeros((B.shape[0], B.shape[1]), None)
    for i, p in enumerate(piv):
        L[i, p] = 1
    return L


def reduce_gpt(g: Gpt, tol: float | None = None) -> Reduction:
    tol = g.tol if tol is None else tol
    S = la.coerce(g.states.vertices, tol)
    E = la.coerce(g.effects.vertices, tol)
    u = la.coerce(g.unit, tol)
    n = g.dim
    if la.rank(S, tol) == n and la.rank(E, tol) == n:
        I = la.eye(n, tol)
        return Reduction(I, I, S, E, u, True)
    Bs, Be = la.row_basis(S, tol), la.row_basis(E, tol)
    Ls, Le = _coord_map(Bs, tol), _coord_map(Be, tol)
    C, R = la.rank_factorization(Be @ Bs.T, tol)
    Ps, Pe = R @ Ls, C.T @ Le
    return Reduction(Ps, Pe, S @ Ps.T, E @ Pe.T, Pe @ u, False)


def _normalize_ray(h: np.ndarray, S: np.ndarray) -> np.ndarray:
    return h / max(S @ h)


def pair_decomposition(g: Gpt, tol: float | None = None) -> PairDecomposition:
    """Vertices of ``K_E`` and normalized dual-cone rays, without weights."""
    tol = g.tol if tol is None else tol
    if len(g.states) == 0 or len(g.effects) == 0:
        raise NonPolytopic("state and effect bodies need finite vertex lists")
    red = reduce_gpt(g, tol)
    E, S, u = red.effects, red.states, red.unit
    one = 1.0 if tol is not None else Fraction(1)
    A = np.concatenate([E, -E])
    b = np.concatenate([la.coerce([one] * len(E), tol), la.zeros(len(E), tol)])
    V = vertices_from_inequalities(A, b, u.reshape(1, -1), la.coerce([one], tol), tol)
    H = extremal_rays(Cone(red.r, facet_normals=S), tol)
    H = np.array([_normalize_ray(h, S) for h in H], dtype=S.dtype)
    V = np.array(sorted(V, key=tuple), dtype=S.dtype)
    return PairDecomposition(V, H, None, red)


# ---------------------------------------------------------------------------
# decision


def _rationalize(g: Gpt) -> Gpt:
    """Exact copy of a float GPT with states renormalized exactly."""
    def q(M):
        return np.array([[Fraction(float(x)).limit_denominator(10**9) for x in row] for row in M], dtype=object)

    u = q(g.unit.reshape(1, -1))[0]
    S = q(g.states.vertices)
    S = np.array([s / (s @ u) for s in S], dtype=object)
    return Gpt.build(S, q(g.effects.vertices), u, tol=None, meta=dict(g.meta), add_trivial=False)


def decide(g: Gpt, tol: float | None = None, minimize: bool = False) -> Verdict:
    """Exact (``tol=None`` on an exact GPT) or float decision of simplex-embeddability.

    A float decision that fails its own re-verification is repeated in
    exact arithmetic on the rationalized GPT, and a warning says so.
    """
    tol = g.tol if tol is None else tol
    if tol is not None:
        try:
            return _decide(g, tol, minimize)
        except NumericalInstability as exc:
            log.info("float decision unstable (%s); deciding exactly", exc)
            v = _decide(_rationalize(g), None, minimize)
            v.warnings.append(f"float decision unstable ({exc}); decided exactly on the rationalized GPT")
            return v
    return _decide(g, tol, minimize)


def _decide(g: Gpt, tol: float | None, minimize: bool) -> Verdict:
    pd = pair_decomposition(g, tol)
    warnings = []
    if not pd.reduction.full:
        msg = f"states/effects span a {pd.reduction.r}-dimensional subspace of R^{g.dim}; verdict concerns that subspace"
        log.warning(msg)
        warnings.append(msg)
    # a failed self-check is a bug in exact mode and a boundary case in float mode
    Fail = RuntimeError if tol is None else NumericalInstability
    A, b = pd.columns(), pd.rhs()
    res = lp.feasible(A, b, tol)
    if not res.feasible:
        if res.farkas is None:
            raise Fail("LP solver reported infeasibility without a certificate")
        out = NotEmbeddable(res.farkas, pd, warnings)
        if not verify_certificate(g, out, tol):
            raise Fail("Farkas certificate failed re-verification")
        return out
    pd = PairDecomposition(pd.V_list, pd.H_list, res.x.reshape(len(pd.V_list), len(pd.H_list)), pd.reduction)
    if minimize:
        pd = minimize_support(pd, tol)
    model = model_from_decomposition(pd)
    bad = model.violations(g, tol)
    if bad:
        raise Fail(f"constructed model violates {bad}")
    return Embeddable(model_to_witness(model), model, pd, warnings)


def model_from_decomposition(pd: PairDecomposition) -> OntologicalModel:
    """One ontic state per used vertex ``V_i``; rays sharing a vertex merge."""
    red = pd.reduction
    rows_mu, rows_xi, labels = [], [], []
    for i, v in enumerate(pd.V_list):
        weights = pd.alpha[i]
        if all(a == 0 for a in weights):
            continue
        h = sum(a * hj for a, hj in zip(weights, pd.H_list) if a != 0)
        rows_mu.append(h @ red.state_map)
        rows_xi.append(v @ red.effect_map)
        labels.append(f"v{i}")
    dtype = pd.V_list.dtype
    return OntologicalModel(np.array(rows_mu, dtype=dtype), np.array(rows_xi, dtype=dtype), tuple(labels))


def verify_certificate(g: Gpt, verdict: NotEmbeddable, tol: float | None = None) -> bool:
    """Rebuild the LP from ``g`` and check the Farkas conditions."""
    tol = g.tol if tol is None else tol
    pd = pair_decomposition(g, tol)
    return lp.verify_farkas(pd.columns(), pd.rhs(), verdict.certificate, tol)


def verify_witness(g: Gpt, w: EmbeddingWitness, tol: float | None = None) -> bool:
    """The three embedding conditions on all vertices and vertex pairs."""
    tol = tol if tol is not None else (None if g.exact and la.is_exact(w.iota) else la.DEFAULT_TOL)
    iota, kappa = la.coerce(w.iota, tol), la.coerce(w.kappa, tol)
    if iota.shape[1] != g.dim or kappa.shape != iota.shape:
        raise DimensionMismatch("witness maps do not act on the GPT's vector space")
    S = la.coerce(g.states.vertices, tol)
    E = la.coerce(g.effects.vertices, tol)
    IS, KE = S @ iota.T, E @ kappa.T
    in_simplex = all(la.sign(x, tol) >= 0 for x in IS.ravel()) and all(la.iszero(t - 1, tol) for t in IS.sum(axis=1))
    in_cube = all(la.sign(x, tol) >= 0 and la.sign(x - 1, tol) <= 0 for x in KE.ravel())
    preserved = all(la.iszero(x, tol) for x in (KE @ IS.T - E @ S.T).ravel())
    return in_simplex and in_cube and preserved


def witness_to_model(w: EmbeddingWitness) -> OntologicalModel:
    return OntologicalModel(w.iota.copy(), w.kappa.copy())


def model_to_witness(m: OntologicalModel) -> EmbeddingWitness:
    return EmbeddingWitness(m.mu_map.copy(), m.xi_map.copy())


# ---------------------------------------------------------------------------
# ontic cardinality bounds


def kill_set_size(g: Gpt, tol: float | None = None) -> int:
    """Largest set of state vertices in which every member has an effect
    vanishing on it and positive on all the others."""
    tol = g.tol if tol is None else tol
    P = la.coerce(g.probabilities(), tol)
    m = P.shape[1]
    zero = [[la.iszero(x, tol) for x in row] for row in P]
    pos = [[la.sign(x, tol) > 0 for x in row] for row in P]

    def kills(s: int, t: int) -> bool:
        return any(zero[e][s] and pos[e][t] for e in range(len(P)))

    G = nx.Graph()
    G.add_nodes_from(range(m))
    G.add_edges_from((s, t) for s in range(m) for t in range(s + 1, m) if kills(s, t) and kills(t, s))
    # a singleton qualifies only if some effect vanishes on it
    best = max((len(c) for c in nx.find_cliques(G)), default=0)
    if best == 1 and not any(any(zero[e][s] for e in range(len(P))) for s in range(m)):
        return 0
    return best


def _sperner_min(k: int) -> int:
    d = 0
    while math.comb(d, d // 2) < k:
        d += 1
    return d


def min_d_lower_bound(g: Gpt, tol: float | None = None) -> int:
    """Lower bound on the ontic cardinality of any ontological model.

    Two bounds are combined: the rank of the probability table, and the face
    argument — states of a kill set must sit on faces of the simplex no two
    of which are nested, so their supports form an antichain and Sperner's
    theorem bounds how many fit in ``d`` vertices.
    """
    tol = g.tol if tol is None else tol
    k = kill_set_size(g, tol)
    return max(la.rank(la.coerce(g.probabilities(), tol), tol), _sperner_min(k))


# ---------------------------------------------------------------------------
# fixed-cardinality search


def _lp_block(fixed: np.ndarray, r: int, d: int, left: bool, A_ub, b_ub, A_eq, b_eq):
    """Minimize ``|X^T M - I|_1`` over one factor with the other fixed.

    ``left=True`` optimizes X (M fixed), otherwise M (X fixed).  Variables are
    the flattened factor followed by ``r*r`` slacks.
    """
    nv = d * r
    coef = np.zeros((r * r, nv))
    for lam in range(d):
        for a in range(r):
            for b in range(r):
                if left:
                    coef[a * r + b, lam * r + a] = fixed[lam, b]
                else:
                    coef[a * r + b, lam * r + b] = fixed[lam, a]
    target = np.eye(r).ravel()
    I = np.eye(r * r)
    ub = np.vstack([np.hstack([coef, -I]), np.hstack([-coef, -I])])
    rhs = np.concatenate([target, -target])
    pad = lambda M: np.hstack([M, np.zeros((M.shape[0], r * r))]) if M is not None and len(M) else None
    A = np.vstack([ub, pad(A_ub)]) if A_ub is not None and len(A_ub) else ub
    bb = np.concatenate([rhs, b_ub]) if b_ub is not None and len(b_ub) else rhs
    res = linprog(
        np.concatenate([np.zeros(nv), np.ones(r * r)]),
        A_ub=A,
        b_ub=bb,
        A_eq=pad(A_eq),
        b_eq=b_eq,
        bounds=[(None, None)] * nv + [(0, None)] * (r * r),
        method="highs",
    )
    if res.status != 0:
        return None, np.inf
    return res.x[:nv].reshape(d, r), float(res.fun)


def _random_vertex(E, u, rng):
    """Vertex of K_E maximizing a random linear functional."""
    k = len(E)
    res = linprog(
        rng.standard_normal(E.shape[1]),
        A_ub=np.vstack([E, -E]),
        b_ub=np.concatenate([np.ones(k), np.zeros(k)]),
        A_eq=u.reshape(1, -1),
        b_eq=[1.0],
        bounds=(None, None),
        method="highs",
    )
    return res.x if res.status == 0 else None


def _search_once(S, E, u, d, rng, max_iter, tol, init):
    m, r = S.shape
    # X-step: 0 <= E x_lam <= 1, x_lam . u = 1
    kx = np.kron(np.eye(d), E)
    x_ub = (np.vstack([kx, -kx]), np.concatenate([np.ones(d * len(E)), np.zeros(d * len(E))]))
    x_eq = (np.kron(np.eye(d), u.reshape(1, -1)), np.ones(d))
    # M-step: S m_lam >= 0, sum_lam m_lam = u
    m_ub = (-np.kron(np.eye(d), S), np.zeros(d * m))
    m_eq = (np.kron(np.ones((1, d)), np.eye(r)), u.copy())
    if init == "vertex":
        rows = [_random_vertex(E, u, rng) for _ in range(d)]
        if any(x is None for x in rows):
            return None
        X = np.array(rows)
    else:
        M = rng.dirichlet(np.ones(d), size=m).T @ np.linalg.pinv(S.T)
        X, _ = _lp_block(M, r, d, True, *x_ub, *x_eq)
        if X is None:
            return None
    prev = np.inf
    for _ in range(max_iter):
        M, res = _lp_block(X, r, d, False, *m_ub, *m_eq)
        if M is None:
            return None
        if res <= tol:
            return M, X
        if prev - res < 1e-9:
            return None
        prev = res
        X, _ = _lp_block(M, r, d, True, *x_ub, *x_eq)
        if X is None:
            return None
    return None


def _search_batch(args):
    S, E, u, d, seeds, max_iter, tol, init = args
    for idx, ss in seeds:
        found = _search_once(S, E, u, d, np.random.default_rng(ss), max_iter, tol, init)
        if found is not None:
            return idx, found
    return None


def bilinear_search(
    g: Gpt,
    d: int,
    restarts: int = 100,
    seed: int | None = 0,
    tol: float = 1e-7,
    max_iter: int = 200,
    init: str = "vertex",
    jobs: int = 1,
) -> OntologicalModel | None:
    """Alternating-LP search for a model with exactly ``d`` ontic states.

    Each restart alternates two LPs (distributions with responses fixed, and
    vice versa), each minimizing the L1 distance of ``xi^T mu`` from the
    identity.  ``init="vertex"`` starts the responses at random vertices of
    ``K_E`` (optimal models can always be taken of that form);
    ``init="dirichlet"`` instead draws the state distributions from a flat
    Dirichlet.  Restart ``i`` uses its own child seed, so the result does not
    depend on ``jobs``.  Failure to find a model is not a proof that none
    exists.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if init not in ("vertex", "dirichlet"):
        raise ValueError(f"unknown init {init!r}")
    red = reduce_gpt(g.as_float() if g.exact else g)
    S, E, u = (la.to_float(x) for x in (red.states, red.effects, red.unit))
    Ps, Pe = la.to_float(red.state_map), la.to_float(red.effect_map)
    seeds = list(enumerate(np.random.SeedSequence(seed).spawn(restarts)))
    jobs = max(1, min(jobs, restarts))
    batches = [(S, E, u, d, seeds[k::jobs], max_iter, tol * 1e-2, init) for k in range(jobs)]
    if jobs == 1:
        hits = [_search_batch(batches[0])]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            hits = list(pool.map(_search_batch, batches))
    for _, (M, X) in sorted((h for h in hits if h is not None), key=lambda h: h[0]):
        model = OntologicalModel(M @ Ps, X @ Pe)
        if model.is_valid_for(g, tol):
            return model
    return None


# ---------------------------------------------------------------------------
# support reduction


def _prune(pd: PairDecomposition) -> PairDecomposition:
    alpha = pd.alpha
    rows = [i for i in range(alpha.shape[0]) if any(a != 0 for a in alpha[i])]
    cols = [j for j in range(alpha.shape[1]) if any(a != 0 for a in alpha[:, j])]
    return PairDecomposition(pd.V_list[rows], pd.H_list[cols], alpha[np.ix_(rows, cols)], pd.reduction)


def minimize_support(pd: PairDecomposition, tol: float | None = None, seed: int | None = None) -> PairDecomposition:
    """Greedily drop pairs while the LP restricted to the rest stays feasible.

    Candidates are tried from the smallest weight upward, ties broken by
    index (``seed`` permutes ties).  The result never has a larger support.
    """
    tol = _tol(pd.V_list) if tol is None else tol
    pd = _prune(pd)
    q = pd.H_list.shape[0]
    A, b = pd.columns(), pd.rhs()
    x = pd.alpha.ravel().copy()
    support = [k for k in range(len(x)) if x[k] != 0]
    tiebreak = np.random.default_rng(seed).permutation(len(x)) if seed is not None else np.arange(len(x))
    order = sorted(support, key=lambda k: (x[k], tiebreak[k]))
    for k in order:
        if x[k] == 0:
            continue
        allowed = [j for j in range(len(x)) if x[j] != 0 and j != k]
        res = lp.feasible(A, b, tol, columns=allowed)
        if res.feasible:
            x = res.x
    alpha = x.reshape(-1, q)
    return _prune(PairDecomposition(pd.V_list, pd.H_list, alpha, pd.reduction))
