"""Prepare-measure GPTs: data model, validity, simpliciality and a catalog."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Sequence

import numpy as np

from . import linalg as la
from .errors import BadParams, DimensionMismatch, InvalidDimension, UnknownName
from .geometry import ConvexBody, dual_body, is_hypercube, is_simplex, same_set
from .models import OntologicalModel

__all__ = [
    "Gpt",
    "SimplicialGpt",
    "GptEquivalenceMaps",
    "ValidityReport",
    "validate",
    "canonical_simplicial",
    "is_simplicial",
    "satisfies_no_restriction",
    "weak_nonclassicality",
    "verify_equivalence",
    "catalog",
    "catalog_model",
    "CATALOG",
]


@dataclass(frozen=True, eq=False)
class Gpt:
    """States, effects and unit effect in ``R^dim`` with the dot product."""

    states: ConvexBody
    effects: ConvexBody
    unit: np.ndarray
    meta: dict = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        states: Any,
        effects: Any,
        unit: Any,
        tol: float | None = None,
        meta: dict | None = None,
        add_trivial: bool = True,
    ) -> "Gpt":
        """Canonicalize raw point lists; ``add_trivial`` inserts 0 and u into the effects."""
        u = la.coerce(unit, tol)
        E = la.coerce(effects, tol).reshape(-1, len(u))
        if add_trivial:
            E = np.concatenate([E, la.zeros((1, len(u)), tol), u.reshape(1, -1)])
        return cls(
            ConvexBody.from_points(la.coerce(states, tol), tol),
            ConvexBody.from_points(E, tol),
            u,
            dict(meta or {}),
        )

    @property
    def dim(self) -> int:
        return len(self.unit)

    @property
    def tol(self) -> float | None:
        return self.states.tol

    @property
    def exact(self) -> bool:
        return self.states.tol is None

    def named_state(self, name: str) -> np.ndarray:
        return la.coerce(self.meta["states"][name], self.tol)

    def named_effect(self, name: str) -> np.ndarray:
        return la.coerce(self.meta["effects"][name], self.tol)

    def probabilities(self) -> np.ndarray:
        """Effect-vertex by state-vertex table of ``<e, s>``."""
        return self.effects.vertices @ self.states.vertices.T

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "unit": la.to_jsonable(self.unit),
            "states": self.states.to_json(),
            "effects": self.effects.to_json(),
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, data: dict, tol: float | None = None) -> "Gpt":
        states = ConvexBody.from_json(data["states"], tol)
        effects = ConvexBody.from_json(data["effects"], tol)
        if states.exact != effects.exact:
            t = tol if tol is not None else la.DEFAULT_TOL
            states = ConvexBody.from_points(la.to_float(states.vertices), t)
            effects = ConvexBody.from_points(la.to_float(effects.vertices), t)
        unit = la.coerce(la.from_jsonable(data["unit"]), states.tol)
        if not (len(unit) == states.ambient_dim == effects.ambient_dim == data.get("dim", len(unit))):
            raise DimensionMismatch("unit, states and effects disagree on the dimension")
        return cls(states, effects, unit, dict(data.get("meta", {})))

    def as_float(self, tol: float | None = None) -> "Gpt":
        t = tol if tol is not None else la.DEFAULT_TOL
        return Gpt(
            ConvexBody.from_points(la.to_float(self.states.vertices), t),
            ConvexBody.from_points(la.to_float(self.effects.vertices), t),
            la.to_float(self.unit),
            dict(self.meta),
        )


@dataclass(frozen=True, eq=False)
class SimplicialGpt(Gpt):
    d: int = 0
    labels: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class GptEquivalenceMaps:
    """``omega`` acts on states, ``epsilon`` on effects (matrices)."""

    omega: np.ndarray
    epsilon: np.ndarray


@dataclass
class ValidityReport:
    checks: dict[str, bool]
    details: dict[str, Any]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": self.checks, "details": self.details}


def validate(g: Gpt, tol: float | None = None) -> ValidityReport:
    """Check every GPT constraint; failures are reported, never raised."""
    tol = g.tol if tol is None else tol
    S = la.coerce(g.states.vertices, tol)
    E = la.coerce(g.effects.vertices, tol)
    u = la.coerce(g.unit, tol)
    slack = None if tol is None else tol * 10
    checks: dict[str, bool] = {}
    details: dict[str, Any] = {}

    bad_norm = [i for i, s in enumerate(S) if not la.iszero(u @ s - 1, slack)]
    checks["states_normalized"] = not bad_norm
    details["unnormalized_states"] = [la.to_jsonable(S[i]) for i in bad_norm]

    P = E @ S.T
    bad_eff = [
        i for i in range(len(E)) if any(la.sign(p, slack) < 0 or la.sign(p - 1, slack) > 0 for p in P[i])
    ]
    checks["effects_in_dual"] = not bad_eff
    details["effects_outside_dual"] = [la.to_jsonable(E[i]) for i in bad_eff]

    checks["contains_zero_effect"] = g.effects.contains(la.zeros(g.dim, tol))
    checks["contains_unit_effect"] = g.effects.contains(u)

    r_gram, r_s, r_e = la.rank(P, tol), la.rank(S, tol), la.rank(E, tol)
    checks["tomography"] = r_gram == r_s == r_e
    details["ranks"] = {"gram": r_gram, "states": r_s, "effects": r_e, "dim": g.dim}
    # finite vertex lists are bounded by construction
    checks["bounded"] = len(S) > 0 and len(E) > 0
    return ValidityReport(checks, details)


def canonical_simplicial(d: int) -> SimplicialGpt:
    """Unit simplex on the standard basis of ``R^d`` with its dual hypercube."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise InvalidDimension(f"d must be a positive integer, got {d!r}")
    I = la.eye(d, None)
    cube = np.array([list(bits) for bits in product([0, 1], repeat=d)], dtype=object)
    labels = tuple(f"b{i}" for i in range(d))
    meta = {
        "name": f"classical({d})",
        "states": {lab: la.to_jsonable(I[i]) for i, lab in enumerate(labels)},
    }
    return SimplicialGpt(
        ConvexBody.from_points(I),
        ConvexBody.from_points(la.exact(cube)),
        la.exact([1] * d),
        meta,
        d=d,
        labels=labels,
    )


def satisfies_no_restriction(g: Gpt) -> bool:
    """True iff the effect body equals the full dual of the state body."""
    return same_set(g.effects, dual_body(g.states, g.unit))


def is_simplicial(g: Gpt) -> bool:
    return is_simplex(g.states) and satisfies_no_restriction(g)


def weak_nonclassicality(g: Gpt) -> dict[str, bool]:
    return {
        "incompatibility": not is_hypercube(g.effects),
        "mixture_ambiguity": not is_simplex(g.states),
    }


def verify_equivalence(g: Gpt, h: Gpt, maps: GptEquivalenceMaps, tol: float | None = None) -> bool:
    """Check that ``maps`` realize an equivalence from ``g`` to ``h``."""
    tol = tol if tol is not None else (None if g.exact and h.exact else la.DEFAULT_TOL)
    W = la.coerce(maps.omega, tol)
    X = la.coerce(maps.epsilon, tol)
    if W.shape != (h.dim, g.dim) or X.shape != (h.dim, g.dim):
        raise DimensionMismatch("map shapes do not match the GPT dimensions")
    if g.dim != h.dim or la.rank(W, tol) < g.dim or la.rank(X, tol) < g.dim:
        return False
    S = la.coerce(g.states.vertices, tol)
    E = la.coerce(g.effects.vertices, tol)
    img_s = ConvexBody.from_points(S @ W.T, tol)
    img_e = ConvexBody.from_points(E @ X.T, tol)
    hs = ConvexBody.from_points(la.coerce(h.states.vertices, tol), tol)
    he = ConvexBody.from_points(la.coerce(h.effects.vertices, tol), tol)
    if not (same_set(img_s, hs, tol) and same_set(img_e, he, tol)):
        return False
    diff = (E @ X.T) @ (S @ W.T).T - E @ S.T
    return all(la.iszero(v, tol) for v in diff.ravel())


# ---------------------------------------------------------------------------
# catalog

_HALF = Fraction(1, 2)

_REBIT_STATES = {"0": (1, 0, 1), "1": (1, 0, -1), "+": (1, 1, 0), "-": (1, -1, 0)}
_REBIT_EFFECTS = {
    "0": (_HALF, 0, _HALF),
    "1": (_HALF, 0, -_HALF),
    "+": (_HALF, _HALF, 0),
    "-": (_HALF, -_HALF, 0),
}
_SQUARE_STATES = {"++": (1, 1, 1), "+-": (1, 1, -1), "-+": (1, -1, 1), "--": (1, -1, -1)}
_SQUARE_EFFECTS = {
    "x+": (_HALF, _HALF, 0),
    "x-": (_HALF, -_HALF, 0),
    "z+": (_HALF, 0, _HALF),
    "z-": (_HALF, 0, -_HALF),
}


def _jsonable_dict(d: dict) -> dict:
    return {k: la.to_jsonable(la.exact(v)) for k, v in d.items()}


def _rebit() -> Gpt:
    unit = (1, 0, 0)
    effects = {**_REBIT_EFFECTS, "zero": (0, 0, 0), "unit": unit}
    meta = {"name": "rebit", "states": _jsonable_dict(_REBIT_STATES), "effects": _jsonable_dict(effects)}
    return Gpt.build(list(_REBIT_STATES.values()), list(_REBIT_EFFECTS.values()), unit, meta=meta)


def _gbit() -> Gpt:
    unit = (1, 0, 0)
    states = ConvexBody.from_points(la.exact(list(_SQUARE_STATES.values())))
    effects = dual_body(states, la.exact(unit))
    meta = {
        "name": "gbit",
        "states": _jsonable_dict(_SQUARE_STATES),
        "effects": _jsonable_dict({**_SQUARE_EFFECTS, "zero": (0, 0, 0), "unit": unit}),
    }
    return Gpt(states, effects, la.exact(unit), meta)


def _restricted_square(effects: Sequence = ("x+", "x-", "z+", "z-"), sharpness: Any = 1) -> Gpt:
    unit = la.exact((1, 0, 0))
    eta = la.to_fraction(sharpness)
    if not 0 <= eta <= 1:
        raise BadParams("sharpness must lie in [0, 1]")
    chosen = {}
    for item in effects:
        if isinstance(item, str):
            if item not in _SQUARE_EFFECTS:
                raise BadParams(f"unknown square effect {item!r}")
            e = la.exact(_SQUARE_EFFECTS[item])
            chosen[item] = (1 - eta) * (unit / 2) + eta * e
        else:
            v = la.exact(item)
            chosen[f"e{len(chosen)}"] = v
    meta = {
        "name": "restricted_square",
        "states": _jsonable_dict(_SQUARE_STATES),
        "effects": {k: la.to_jsonable(v) for k, v in chosen.items()},
    }
    return Gpt.build(list(_SQUARE_STATES.values()), list(chosen.values()) or la.zeros((0, 3), None), unit, meta=meta)


def _circle_point(theta: float, max_den: int) -> tuple[Fraction, Fraction]:
    """Rational point exactly on the unit circle near angle ``theta``."""
    half = theta / 2
    if abs(math.cos(half)) < 1e-12:
        return Fraction(-1), Fraction(0)
    t = Fraction(math.tan(half)).limit_denominator(max_den)
    return (1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)


def _polygon(n: int, effects: Sequence | None = None, max_den: int = 10**4) -> Gpt:
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise BadParams("polygon needs n >= 3")
    pts = [(Fraction(1),) + _circle_point(2 * math.pi * k / n, max_den) for k in range(n)]
    states = ConvexBody.from_points(la.exact(pts))
    unit = la.exact((1, 0, 0))
    meta = {"name": f"polygon({n})", "states": {f"s{k}": la.to_jsonable(la.exact(p)) for k, p in enumerate(pts)}}
    if effects is None:
        return Gpt(states, dual_body(states, unit), unit, meta)
    return Gpt.build(states.vertices, la.exact(effects), unit, meta=meta)


CATALOG = ("rebit", "gbit", "classical", "polygon", "restricted_square")


def catalog(name: str, **params) -> Gpt:
    """Named example theories; each result passes :func:`validate`."""
    try:
        if name == "rebit":
            g = _rebit()
        elif name == "gbit":
            g = _gbit()
        elif name == "classical":
            g = canonical_simplicial(int(params.get("d", 2)))
        elif name == "polygon":
            g = _polygon(int(params.get("n", 5)), params.get("effects"))
        elif name == "restricted_square":
            g = _restricted_square(params.get("effects", ("x+", "x-", "z+", "z-")), params.get("sharpness", 1))
        else:
            raise UnknownName(name)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (UnknownName, BadParams)):
            raise
        raise BadParams(str(exc)) from exc
    report = validate(g)
    if not report.ok:
        raise BadParams(f"parameters give an invalid GPT: {report.failures()}")
    return g


def catalog_model(name: str) -> OntologicalModel:
    """Reference ontological model shipped with a catalog entry.

    For the rebit this is the toy-theory model on four ontic states
    ``(0+, 0-, 1+, 1-)``.
    """
    if name == "rebit":
        q = Fraction(1, 4)
        mu = la.exact([[q, q, q], [q, -q, q], [q, q, -q], [q, -q, -q]])
        xi = la.exact([[1, 1, 1], [1, -1, 1], [1, 1, -1], [1, -1, -1]])
        return OntologicalModel(mu, xi, ("0+", "0-", "1+", "1-"))
    if name == "classical":
        raise UnknownName("use embed.decide on canonical_simplicial(d) for the identity model")
    raise UnknownName(f"no reference model for {name!r}")
