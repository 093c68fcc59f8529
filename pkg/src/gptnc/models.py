"""Ontological models and simplex-embedding witnesses of a GPT.

Both objects are pairs of ``d x n`` matrices acting on GPT vectors.  In the
canonical simplicial frame the two notions coincide: the ontic states are
the simplex vertices, distributions are points of the simplex and response
functions are points of its dual hypercube.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, TYPE_CHECKING

import numpy as np

from . import linalg as la

if TYPE_CHECKING:
    from .gpt import Gpt


@dataclass(frozen=True, eq=False)
class OntologicalModel:
    """Linear maps ``s -> mu_map @ s`` (distributions over the ontic set)
    and ``e -> xi_map @ e`` (response functions)."""

    mu_map: np.ndarray
    xi_map: np.ndarray
    labels: tuple[str, ...] | None = None

    @property
    def d(self) -> int:
        return self.mu_map.shape[0]

    @property
    def exact(self) -> bool:
        return la.is_exact(self.mu_map)

    def mu(self, s: Any) -> np.ndarray:
        return self.mu_map @ la.coerce(s, None if self.exact else 0.0)

    def xi(self, e: Any) -> np.ndarray:
        return self.xi_map @ la.coerce(e, None if self.exact else 0.0)

    def violations(self, g: "Gpt", tol: float | None = None) -> list[str]:
        """Names of the model invariants that fail on ``g``'s vertices."""
        tol = _tol_for(self.mu_map, g, tol)
        S = la.coerce(g.states.vertices, tol)
        E = la.coerce(g.effects.vertices, tol)
        u = la.coerce(g.unit, tol)
        M = la.coerce(self.mu_map, tol)
        X = la.coerce(self.xi_map, tol)
        if M.shape[1] != g.dim or X.shape != M.shape:
            return ["shape"]
        bad = []
        mus = S @ M.T
        xis = E @ X.T
        if any(la.sign(v, tol) < 0 for v in mus.ravel()):
            bad.append("mu_nonnegative")
        if any(not la.iszero(v - 1, tol) for v in mus.sum(axis=1)):
            bad.append("mu_normalized")
        if any(la.sign(v, tol) < 0 or la.sign(v - 1, tol) > 0 for v in xis.ravel()):
            bad.append("xi_in_unit_interval")
        if any(not la.iszero(v - 1, tol) for v in X @ u):
            bad.append("xi_unit_all_ones")
        if any(not la.iszero(v, tol) for v in (xis @ mus.T - E @ S.T).ravel()):
            bad.append("reproduces_probabilities")
        return bad

    def is_valid_for(self, g: "Gpt", tol: float | None = None) -> bool:
        return not self.violations(g, tol)

    def to_json(self) -> dict:
        out = {"d": self.d, "mu_map": la.to_jsonable(self.mu_map), "xi_map": la.to_jsonable(self.xi_map)}
        if self.labels:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "OntologicalModel":
        labels = tuple(data["labels"]) if data.get("labels") else None
        return cls(la.from_jsonable(data["mu_map"]), la.from_jsonable(data["xi_map"]), labels)


@dataclass(frozen=True, eq=False)
class EmbeddingWitness:
    """Linear maps ``iota, kappa : V -> R^d`` into the canonical simplex and its dual."""

    iota: np.ndarray
    kappa: np.ndarray

    @property
    def d(self) -> int:
        return self.iota.shape[0]

    def to_json(self) -> dict:
        return {"d": self.d, "iota": la.to_jsonable(self.iota), "kappa": la.to_jsonable(self.kappa)}

    @classmethod
    def from_json(cls, data: dict) -> "EmbeddingWitness":
        return cls(la.from_jsonable(data["iota"]), la.from_jsonable(data["kappa"]))


def _tol_for(arr: np.ndarray, g: "Gpt", tol: float | None) -> float | None:
    if tol is not None:
        return tol
    if la.is_exact(arr) and g.exact:
        return None
    return g.tol if g.tol is not None else la.DEFAULT_TOL
