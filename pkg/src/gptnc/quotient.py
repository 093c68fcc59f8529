"""Operational theories and their quotient to a GPT.

A table ``Pr([k|M], P)`` (rows are operational effects, columns are
preparations) is rank-factorized as ``C @ R``; columns of ``R`` become state
vectors and rows of ``C`` effect vectors.  Operationally equivalent
procedures have equal table columns (rows) and therefore land on the same
vector, which is what makes models built through the quotient
noncontextual.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import linalg as la
from .errors import (
    InconsistentTable,
    MalformedInput,
    ModelMismatch,
    NotWellDefined,
    RankDeficientNormalization,
)
from .gpt import Gpt
from .models import OntologicalModel

__all__ = [
    "Mixture",
    "CoarseGraining",
    "Relations",
    "OperationalTheory",
    "QuotientMaps",
    "OtOntologicalModel",
    "equivalence_classes",
    "quotient_to_gpt",
    "verify_quotient",
    "lift_model",
    "project_model",
    "theory_from_gpt",
    "read_table_csv",
    "write_table_csv",
    "read_relations",
]


@dataclass(frozen=True)
class Mixture:
    """``target = sum_c weight_c * c`` over preparations."""

    target: str
    components: Mapping[str, Any]


@dataclass(frozen=True)
class CoarseGraining:
    """``target = sum of parts`` over operational effects."""

    target: str
    parts: tuple[str, ...]


@dataclass(frozen=True)
class Relations:
    mixtures: tuple[Mixture, ...] = ()
    coarse_grainings: tuple[CoarseGraining, ...] = ()

    def to_json(self) -> dict:
        return {
            "mixtures": [
                {"target": m.target, "components": {k: la.scalar_to_json(la.to_fraction(w)) for k, w in m.components.items()}}
                for m in self.mixtures
            ],
            "coarse_grainings": [{"target": c.target, "parts": list(c.parts)} for c in self.coarse_grainings],
        }


def read_relations(data: Mapping | str | Path | None) -> Relations:
    """Parse the relations sidecar (a dict, JSON text or a path)."""
    if data is None:
        return Relations()
    if isinstance(data, Path) or (isinstance(data, str) and not data.lstrip().startswith("{")):
        data = json.loads(Path(data).read_text())
    elif isinstance(data, str):
        data = json.loads(data)
    try:
        mixes = tuple(Mixture(m["target"], dict(m["components"])) for m in data.get("mixtures", []))
        cgs = tuple(CoarseGraining(c["target"], tuple(c["parts"])) for c in data.get("coarse_grainings", []))
    except (KeyError, TypeError, AttributeError) as exc:
        raise MalformedInput(f"bad relations document: {exc}") from exc
    return Relations(mixes, cgs)


def _split_label(label: str) -> tuple[str, str]:
    if label.count("|") != 1:
        raise MalformedInput(f"effect label {label!r} is not of the form 'k|M'")
    k, m = (x.strip() for x in label.split("|"))
    if not k or not m:
        raise MalformedInput(f"effect label {label!r} is not of the form 'k|M'")
    return k, m


@dataclass(frozen=True, eq=False)
class OperationalTheory:
    """Labeled preparations and measurements with their probability table.

    ``table[i, j]`` is the probability of effect ``effect_labels[i]`` on
    preparation ``preps[j]``.  ``tol`` is ``None`` for exact tables.
    """

    preps: tuple[str, ...]
    effect_labels: tuple[str, ...]
    table: np.ndarray
    relations: Relations = field(default_factory=Relations)
    tol: float | None = None

    @classmethod
    def create(
        cls,
        preps: Sequence[str],
        effect_labels: Sequence[str],
        table: Any,
        relations: Relations | Mapping | None = None,
        tol: float | None = None,
        check: bool = True,
    ) -> "OperationalTheory":
        T = la.coerce(table, tol)
        if T.ndim != 2 or T.shape != (len(effect_labels), len(preps)):
            raise MalformedInput(f"table shape {T.shape} does not match {len(effect_labels)} effects x {len(preps)} preps")
        if len(set(preps)) != len(preps) or len(set(effect_labels)) != len(effect_labels):
            raise MalformedInput("labels must be unique")
        for lab in effect_labels:
            _split_label(lab)
        if not isinstance(relations, Relations):
            relations = read_relations(relations)
        t = cls(tuple(preps), tuple(effect_labels), T, relations, tol)
        if check:
            t.check()
        return t

    @property
    def exact(self) -> bool:
        return self.tol is None

    @property
    def measurements(self) -> list[tuple[str, list[str]]]:
        """``(M, [k, ...])`` in order of first appearance."""
        out: dict[str, list[str]] = {}
        for lab in self.effect_labels:
            k, m = _split_label(lab)
            out.setdefault(m, []).append(k)
        return list(out.items())

    def rows_of(self, measurement: str) -> list[int]:
        return [i for i, lab in enumerate(self.effect_labels) if _split_label(lab)[1] == measurement]

    def column(self, prep: str) -> np.ndarray:
        return self.table[:, self.preps.index(prep)]

    def row(self, effect: str) -> np.ndarray:
        return self.table[self.effect_labels.index(effect)]

    def normalization_defects(self) -> dict[str, float]:
        """Largest ``|sum_k Pr([k|M], P) - 1|`` per measurement."""
        out = {}
        for m, _ in self.measurements:
            sums = self.table[self.rows_of(m)].sum(axis=0)
            out[m] = max(abs(float(s - 1)) for s in sums)
        return out

    def check(self, slack: float = 0.0) -> None:
        """Raise InconsistentTable unless entries, normalization and relations hold.

        ``slack`` widens every tolerance (used for noisy tables).
        """
        tol = None if self.tol is None and slack == 0 else (self.tol or 0.0) + slack
        for x in self.table.ravel():
            if la.sign(x, tol) < 0 or la.sign(x - 1, tol) > 0:
                raise InconsistentTable(f"probability {x} outside [0, 1]")
        for m, _ in self.measurements:
            for s in self.table[self.rows_of(m)].sum(axis=0):
                if not la.iszero(s - 1, tol):
                    raise InconsistentTable(f"outcomes of measurement {m!r} sum to {s}, not 1")
        self._check_relations(tol)

    def _check_relations(self, tol: float | None) -> None:
        for mix in self.relations.mixtures:
            try:
                lhs = self.column(mix.target)
                rhs = sum(la.coerce([w], tol)[0] * self.column(c) for c, w in mix.components.items())
            except ValueError as exc:
                raise InconsistentTable(f"mixture refers to unknown preparation: {exc}") from exc
            if any(not la.iszero(v, tol) for v in lhs - rhs):
                raise InconsistentTable(f"declared mixture for {mix.target!r} does not hold in the table")
        for cg in self.relations.coarse_grainings:
            try:
                lhs = self.row(cg.target)
                rhs = sum(self.row(p) for p in cg.parts)
            except ValueError as exc:
                raise InconsistentTable(f"coarse-graining refers to unknown effect: {exc}") from exc
            if any(not la.iszero(v, tol) for v in lhs - rhs):
                raise InconsistentTable(f"declared coarse-graining for {cg.target!r} does not hold in the table")


def _classes(vectors: np.ndarray, labels: Sequence[str], tol: float | None) -> list[list[str]]:
    groups: list[tuple[np.ndarray, list[str]]] = []
    for v, lab in zip(vectors, labels):
        for rep, members in groups:
            if all(la.iszero(x, tol) for x in v - rep):
                members.append(lab)
                break
        else:
            groups.append((v, [lab]))
    return [members for _, members in groups]


def equivalence_classes(t: OperationalTheory, tol: float | None = None) -> tuple[list[list[str]], list[list[str]]]:
    """Partitions of preparations (equal columns) and effects (equal rows)."""
    tol = t.tol if tol is None else tol
    T = la.coerce(t.table, tol)
    return _classes(T.T, t.preps, tol), _classes(T, t.effect_labels, tol)


@dataclass(frozen=True, eq=False)
class QuotientMaps:
    """Where each preparation and operational effect lands in the GPT.

    ``rank`` is the inner dimension kept; ``discarded`` lists the singular
    values dropped by the float factorization (empty in exact mode).
    """

    state_of: dict[str, np.ndarray]
    effect_of: dict[str, np.ndarray]
    rank: int
    discarded: tuple[float, ...] = ()

    def states_matrix(self, preps: Sequence[str]) -> np.ndarray:
        return np.array([self.state_of[p] for p in preps])

    def effects_matrix(self, effects: Sequence[str]) -> np.ndarray:
        return np.array([self.effect_of[e] for e in effects])

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "discarded": list(self.discarded),
            "states": {k: la.to_jsonable(v) for k, v in self.state_of.items()},
            "effects": {k: la.to_jsonable(v) for k, v in self.effect_of.items()},
        }


def _factorize(T: np.ndarray, tol: float | None) -> tuple[np.ndarray, np.ndarray, tuple[float, ...]]:
    if tol is None:
        C, R = la.rank_factorization(T, None)
        return C, R, ()
    U, s, Vt = np.linalg.svd(T, full_matrices=False)
    r = int(np.sum(s > tol))
    return U[:, :r] * s[:r], Vt[:r], tuple(float(x) for x in s[r:])


def quotient_to_gpt(t: OperationalTheory, tol: float | None = None) -> tuple[Gpt, QuotientMaps]:
    """The GPT associated to ``t`` and the quotienting maps.

    Coordinates are fixed so that the unit effect is ``(1, 0, ..., 0)`` and
    every state has first coordinate 1.
    """
    tol = t.tol if tol is None else tol
    T = la.coerce(t.table, tol)
    meas = t.measurements
    if not meas:
        raise RankDeficientNormalization("no measurement to supply the unit effect")
    C, R, dropped = _factorize(T, tol)
    r = C.shape[1]
    if r == 0:
        raise RankDeficientNormalization("table has rank zero")
    # every measurement's effects sum to the same functional u
    sums = [C[t.rows_of(m)].sum(axis=0) for m, _ in meas]
    u = sums[0] if tol is None else np.mean(sums, axis=0)
    check_tol = None if tol is None else max(tol, 1e-12) * 1e3
    for s in sums:
        if any(not la.iszero(x, check_tol) for x in s - u):
            raise InconsistentTable("measurements disagree on the unit effect")
    if any(not la.iszero(x - 1, check_tol) for x in u @ R):
        raise RankDeficientNormalization("no unit functional evaluates to 1 on every preparation")
    G = la.complete_basis(u.reshape(1, -1), tol)
    S = R.T @ G.T
    E = C @ la.inv(G, tol)
    if tol is None:
        unit = la.zeros(r, None)
        unit[0] = la.to_fraction(1)
    else:
        unit = np.zeros(r)
        unit[0] = 1.0
        S[:, 0] = 1.0
    g = Gpt.build(S, E, unit, tol=tol, meta={"source": "quotient", "rank": r})
    maps = QuotientMaps(
        {p: S[j] for j, p in enumerate(t.preps)},
        {lab: E[i] for i, lab in enumerate(t.effect_labels)},
        r,
        dropped,
    )
    return g, maps


def verify_quotient(t: OperationalTheory, g: Gpt, maps: QuotientMaps, tol: float | None = None) -> bool:
    """Check probability reproduction and that equivalents share vectors."""
    tol = tol if tol is not None else t.tol
    try:
        S = la.coerce(maps.states_matrix(t.preps), tol)
        E = la.coerce(maps.effects_matrix(t.effect_labels), tol)
    except KeyError:
        return False
    if S.shape[1] != g.dim or E.shape[1] != g.dim:
        return False
    if any(not la.iszero(x, tol) for x in (E @ S.T - la.coerce(t.table, tol)).ravel()):
        return False
    preps, effects = equivalence_classes(t, tol)
    for cls_, vec in ((preps, maps.state_of), (effects, maps.effect_of)):
        for members in cls_:
            ref = la.coerce(vec[members[0]], tol)
            if any(any(not la.iszero(x, tol) for x in la.coerce(vec[m], tol) - ref) for m in members[1:]):
                return False
    return True


@dataclass(frozen=True, eq=False)
class OtOntologicalModel:
    """Ontological model of an operational theory, procedure by procedure."""

    ontic: tuple[str, ...]
    mu: dict[str, np.ndarray]
    xi: dict[str, np.ndarray]

    @property
    def d(self) -> int:
        return len(self.ontic)

    def violations(self, t: OperationalTheory, tol: float | None = None) -> list[str]:
        tol = t.tol if tol is None else tol
        M = la.coerce([self.mu[p] for p in t.preps], tol)
        X = la.coerce([self.xi[e] for e in t.effect_labels], tol)
        bad = []
        if any(la.sign(x, tol) < 0 for x in M.ravel()) or any(not la.iszero(s - 1, tol) for s in M.sum(axis=1)):
            bad.append("mu_distributions")
        if any(la.sign(x, tol) < 0 or la.sign(x - 1, tol) > 0 for x in X.ravel()):
            bad.append("xi_in_unit_interval")
        if any(not la.iszero(x, tol) for x in (X @ M.T - la.coerce(t.table, tol)).ravel()):
            bad.append("reproduces_table")
        for mix in t.relations.mixtures:
            rhs = sum(la.coerce([w], tol)[0] * la.coerce(self.mu[c], tol) for c, w in mix.components.items())
            if any(not la.iszero(x, tol) for x in la.coerce(self.mu[mix.target], tol) - rhs):
                bad.append(f"mixture:{mix.target}")
        for cg in t.relations.coarse_grainings:
            rhs = sum(la.coerce(self.xi[p], tol) for p in cg.parts)
            if any(not la.iszero(x, tol) for x in la.coerce(self.xi[cg.target], tol) - rhs):
                bad.append(f"coarse_graining:{cg.target}")
        return bad

    def is_noncontextual(self, t: OperationalTheory, tol: float | None = None) -> bool:
        """Equivalent procedures get identical representations."""
        tol = t.tol if tol is None else tol
        preps, effects = equivalence_classes(t, tol)
        for cls_, rep in ((preps, self.mu), (effects, self.xi)):
            for members in cls_:
                ref = la.coerce(rep[members[0]], tol)
                for m in members[1:]:
                    if any(not la.iszero(x, tol) for x in la.coerce(rep[m], tol) - ref):
                        return False
        return True

    def to_json(self) -> dict:
        return {
            "ontic": list(self.ontic),
            "mu": {k: la.to_jsonable(v) for k, v in self.mu.items()},
            "xi": {k: la.to_jsonable(v) for k, v in self.xi.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "OtOntologicalModel":
        return cls(
            tuple(data["ontic"]),
            {k: la.from_jsonable(v) for k, v in data["mu"].items()},
            {k: la.from_jsonable(v) for k, v in data["xi"].items()},
        )


def lift_model(gm: OntologicalModel, maps: QuotientMaps, t: OperationalTheory, tol: float | None = None) -> OtOntologicalModel:
    """Compose the quotient with a GPT model: ``mu(P) = mu_map s_P``, ``xi(e) = xi_map e``."""
    tol = t.tol if tol is None else tol
    M, X = la.coerce(gm.mu_map, tol), la.coerce(gm.xi_map, tol)
    S = la.coerce(maps.states_matrix(t.preps), tol)
    E = la.coerce(maps.effects_matrix(t.effect_labels), tol)
    if M.shape[1] != S.shape[1] or X.shape != M.shape:
        raise ModelMismatch("model acts on a space of the wrong dimension")
    mus, xis = S @ M.T, E @ X.T
    if any(not la.iszero(x, tol) for x in (xis @ mus.T - E @ S.T).ravel()):
        raise ModelMismatch("model does not reproduce the quotiented probabilities")
    ontic = gm.labels or tuple(f"l{i}" for i in range(gm.d))
    return OtOntologicalModel(
        tuple(ontic),
        {p: mus[j] for j, p in enumerate(t.preps)},
        {e: xis[i] for i, e in enumerate(t.effect_labels)},
    )


def project_model(otm: OtOntologicalModel, maps: QuotientMaps, t: OperationalTheory, tol: float | None = None) -> OntologicalModel:
    """The unique linear GPT model agreeing with ``otm`` on quotiented vectors.

    Raises NotWellDefined when no linear map exists, which happens exactly
    when ``otm`` treats equivalent procedures (or mixtures) differently.
    """
    tol = t.tol if tol is None else tol
    S = la.coerce(maps.states_matrix(t.preps), tol)
    E = la.coerce(maps.effects_matrix(t.effect_labels), tol)
    Mu = la.coerce([otm.mu[p] for p in t.preps], tol)
    Xi = la.coerce([otm.xi[e] for e in t.effect_labels], tol)
    mu_map = la.solve(S, Mu, tol)
    xi_map = la.solve(E, Xi, tol)
    if mu_map is None:
        raise NotWellDefined("distributions are not a linear function of the quotiented states")
    if xi_map is None:
        raise NotWellDefined("response functions are not a linear function of the quotiented effects")
    return OntologicalModel(mu_map.T.copy(), xi_map.T.copy(), otm.ontic)


def theory_from_gpt(g: Gpt, state_names: Sequence[str] | None = None) -> OperationalTheory:
    """Operational theory with one preparation per state vertex and a binary
    measurement ``{e, u - e}`` per nontrivial effect vertex."""
    S = g.states.vertices
    E = g.effects.vertices
    u = g.unit
    preps = list(state_names) if state_names else [f"s{j}" for j in range(len(S))]
    labels, rows = [], []
    for i, e in enumerate(E):
        if all(x == 0 for x in e) or all(la.iszero(x, g.tol) for x in e - u):
            continue
        p = e @ S.T
        labels += [f"yes|M{i}", f"no|M{i}"]
        rows += [p, 1 - p]
    labels += ["yes|T", "no|T"]
    rows += [u @ S.T, 0 * (u @ S.T)]
    return OperationalTheory.create(preps, labels, np.array(rows, dtype=S.dtype), tol=g.tol)


# ---------------------------------------------------------------------------
# CSV


def _parse_cell(text: str, tol: float | None):
    text = text.strip()
    try:
        return la.to_fraction(text) if tol is None else float(la.to_fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"cannot parse probability {text!r}") from exc


def read_table_csv(
    source: str | Path | io.TextIOBase,
    relations: Relations | Mapping | str | Path | None = None,
    tol: float | None = None,
    check: bool = True,
) -> OperationalTheory:
    """Header ``prep,k|M,...`` then one row per preparation.

    Cells may be integers, decimals or ``p/q`` fractions; decimals are read
    exactly in exact mode.
    """
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        text = Path(source).read_text()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise MalformedInput("CSV needs a header and at least one preparation row")
    header = [c.strip() for c in rows[0]]
    labels = header[1:]
    if not labels:
        raise MalformedInput("CSV header lists no effects")
    preps, cols = [], []
    for r in rows[1:]:
        if len(r) != len(header):
            raise MalformedInput(f"row {r!r} has {len(r)} cells, header has {len(header)}")
        preps.append(r[0].strip())
        cols.append([_parse_cell(c, tol) for c in r[1:]])
    table = np.array(cols, dtype=object if tol is None else float).T
    rel = relations if isinstance(relations, Relations) else read_relations(relations)
    return OperationalTheory.create(preps, labels, table, rel, tol, check=check)


def write_table_csv(t: OperationalTheory, dest: str | Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["prep", *t.effect_labels])
    for j, p in enumerate(t.preps):
        w.writerow([p, *(la.scalar_to_json(x) for x in t.table[:, j])])
    text = buf.getvalue()
    if dest is not None:
        Path(dest).write_text(text)
    return text
