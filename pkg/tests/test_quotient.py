import json
from fractions import Fraction as F

import numpy as np
import pytest

from gptnc import embed, linalg as la, quotient as q
from gptnc.errors import InconsistentTable, MalformedInput, ModelMismatch, NotWellDefined
from gptnc.gpt import GptEquivalenceMaps, canonical_simplicial, catalog, catalog_model, validate, verify_equivalence

from oracles import rebit_table_csv

RELATIONS = {
    "mixtures": [{"target": "mix", "components": {"0": "1/2", "1": "1/2"}}],
    "coarse_grainings": [{"target": "yes|T", "parts": ["0|Z", "1|Z"]}],
}


@pytest.fixture(scope="module")
def rebit_theory():
    return q.read_table_csv(rebit_table_csv(), RELATIONS)


@pytest.fixture(scope="module")
def rebit_quotient(rebit_theory):
    return q.quotient_to_gpt(rebit_theory)


def _equivalence_to_catalog(g, maps):
    """Maps sending the quotient's coordinates to the catalog rebit's."""
    rebit = catalog("rebit")
    names = ["0", "1", "+", "-"]
    S = np.array([maps.state_of[n] for n in names])
    T = np.array([rebit.named_state(n) for n in names])
    omega = la.solve(S, T).T  # omega @ s_quotient = s_rebit
    eps = la.inv(omega).T
    return rebit, GptEquivalenceMaps(omega, eps)


def test_equivalence_classes(rebit_theory):
    preps, effects = q.equivalence_classes(rebit_theory)
    assert ["0", "0b"] in preps and ["mix"] in preps
    assert ["h|C", "t|C"] in effects
    plain = q.read_table_csv(rebit_table_csv(duplicate=False, mixture=False))
    preps, _ = q.equivalence_classes(plain)
    assert all(len(c) == 1 for c in preps)


def test_quotient_rebit(rebit_theory, rebit_quotient):
    g, maps = rebit_quotient
    assert g.dim == 3 and maps.rank == 3
    assert validate(g).ok
    assert q.verify_quotient(rebit_theory, g, maps)
    rebit, eq = _equivalence_to_catalog(g, maps)
    assert verify_equivalence(g, rebit, eq)
    assert all(x == 0 for x in maps.state_of["0"] - maps.state_of["0b"])
    assert all(x == 1 for x in [s[0] for s in g.states.vertices])


def test_relations_survive_quotienting(rebit_quotient):
    _, maps = rebit_quotient
    s = maps.state_of
    assert all(x == 0 for x in s["mix"] - (s["0"] + s["1"]) / 2)
    e = maps.effect_of
    assert all(x == 0 for x in e["yes|T"] - e["0|Z"] - e["1|Z"])


def test_classical_coin():
    t = q.OperationalTheory.create(["H", "T"], ["h|F", "t|F"], [[1, 0], [0, 1]])
    g, maps = q.quotient_to_gpt(t)
    assert g.dim == 2 and len(g.states) == 2 and len(g.effects) == 4
    # the quotient differs from the canonical form by an invertible change of basis
    S = np.array([maps.state_of["H"], maps.state_of["T"]])
    omega = la.inv(S)  # sends the quotient states to the unit vectors
    eps = la.inv(omega).T
    assert verify_equivalence(g, canonical_simplicial(2), GptEquivalenceMaps(omega, eps))
    hand = q.QuotientMaps({"H": la.exact([1, 0]), "T": la.exact([0, 1])},
                          {"h|F": la.exact([1, 0]), "t|F": la.exact([0, 1])}, 2)
    assert q.verify_quotient(t, canonical_simplicial(2), hand)


def test_verify_quotient_rejects_perturbation(rebit_theory, rebit_quotient):
    g, maps = rebit_quotient
    fl = {k: la.to_float(v) for k, v in maps.state_of.items()}
    fl["+"] = fl["+"] + 1e-3
    bad = q.QuotientMaps(fl, {k: la.to_float(v) for k, v in maps.effect_of.items()}, 3)
    assert not q.verify_quotient(rebit_theory, g, bad, tol=1e-9)


def test_lift_model(rebit_theory, rebit_quotient):
    g, maps = rebit_quotient
    v = embed.decide(g)
    ot = q.lift_model(v.model, maps, rebit_theory)
    assert ot.violations(rebit_theory) == []
    assert ot.is_noncontextual(rebit_theory)
    assert list(ot.mu["0"]) == list(ot.mu["0b"])


def test_lift_toy_model(rebit_quotient, rebit_theory):
    g, maps = rebit_quotient
    rebit, eq = _equivalence_to_catalog(g, maps)
    toy = catalog_model("rebit")
    # pull the toy model back through the equivalence
    model = type(toy)(toy.mu_map @ la.exact(eq.omega), toy.xi_map @ la.exact(eq.epsilon), toy.labels)
    ot = q.lift_model(model, maps, rebit_theory)
    h = F(1, 2)
    assert list(ot.mu["0"]) == [h, h, 0, 0]
    assert list(ot.xi["+|X"]) == [1, 0, 1, 0]


def test_lift_mismatch(rebit_theory, rebit_quotient):
    _, maps = rebit_quotient
    Model = type(catalog_model("rebit"))
    with pytest.raises(ModelMismatch):
        q.lift_model(Model(la.eye(4, None), la.eye(4, None)), maps, rebit_theory)
    one = la.exact([[1, 0, 0]])
    with pytest.raises(ModelMismatch):
        q.lift_model(Model(one, one), maps, rebit_theory)


def test_project_model(rebit_theory, rebit_quotient):
    g, maps = rebit_quotient
    v = embed.decide(g)
    ot = q.lift_model(v.model, maps, rebit_theory)
    back = q.project_model(ot, maps, rebit_theory)
    assert (back.mu_map == v.model.mu_map).all() and (back.xi_map == v.model.xi_map).all()
    mu = dict(ot.mu)
    mu["0b"] = mu["0b"][::-1].copy()
    contextual = q.OtOntologicalModel(ot.ontic, mu, ot.xi)
    assert not contextual.is_noncontextual(rebit_theory)
    with pytest.raises(NotWellDefined):
        q.project_model(contextual, maps, rebit_theory)


def test_quotient_idempotent():
    for g in (catalog("rebit"), catalog("gbit"), canonical_simplicial(3)):
        t = q.theory_from_gpt(g)
        h, maps = q.quotient_to_gpt(t)
        S = np.array([maps.state_of[f"s{j}"] for j in range(len(g.states))])
        omega = la.solve(S, g.states.vertices).T
        eq = GptEquivalenceMaps(omega, la.inv(omega).T)
        assert verify_equivalence(h, g, eq)


def test_float_quotient_reports_rank(rebit_theory):
    t = q.read_table_csv(rebit_table_csv(), RELATIONS, tol=1e-9)
    g, maps = q.quotient_to_gpt(t)
    assert maps.rank == 3 and len(maps.discarded) > 0
    assert validate(g).ok and q.verify_quotient(t, g, maps)


def test_table_errors():
    with pytest.raises(InconsistentTable):
        q.OperationalTheory.create(["a"], ["0|M", "1|M"], [[F(1, 2)], [F(3, 4)]])
    with pytest.raises(InconsistentTable):
        q.OperationalTheory.create(["a"], ["0|M", "1|M"], [[F(3, 2)], [F(-1, 2)]])
    with pytest.raises(MalformedInput):
        q.OperationalTheory.create(["a"], ["0M", "1|M"], [[1], [0]])
    bad_rel = {"mixtures": [{"target": "a", "components": {"b": 1}}]}
    with pytest.raises(InconsistentTable):
        q.OperationalTheory.create(["a", "b"], ["0|M", "1|M"], [[1, 0], [0, 1]], bad_rel)
    with pytest.raises(MalformedInput):
        q.read_table_csv("prep,0|M\n")
    with pytest.raises(MalformedInput):
        q.read_table_csv("prep,0|M,1|M\na,x,1\n")


def test_csv_round_trip(rebit_theory, tmp_path):
    path = tmp_path / "t.csv"
    q.write_table_csv(rebit_theory, path)
    t2 = q.read_table_csv(path, RELATIONS)
    assert (t2.table == rebit_theory.table).all() and t2.preps == rebit_theory.preps
    rel = tmp_path / "r.json"
    rel.write_text(json.dumps(RELATIONS))
    assert q.read_relations(rel).mixtures[0].target == "mix"
    assert q.read_relations(q.Relations().to_json()) == q.Relations()


def test_decimal_cells_read_exactly():
    t = q.read_table_csv("prep,0|M,1|M\na,0.1,0.9\n")
    assert t.table[0, 0] == F(1, 10)
