from fractions import Fraction as F

import numpy as np
import pytest

from gptnc import app, embed, linalg as la
from gptnc.errors import MalformedInput, NormalizationViolation
from gptnc.gpt import Gpt, canonical_simplicial, catalog, validate
from gptnc.quotient import theory_from_gpt


def table_csv(g, noise=0.0, seed=0):
    """CSV of ``g``'s binary-measurement table, with each yes/no pair moved
    by the same amount in opposite directions (so sums stay 1)."""
    t = theory_from_gpt(g)
    T = la.to_float(t.table) if noise else t.table
    if noise:
        rng = np.random.default_rng(seed)
        for i in range(0, len(T), 2):
            d = rng.uniform(-noise, noise, T.shape[1])
            T[i] = np.clip(T[i] + d, 0, 1)
            T[i + 1] = 1 - T[i]
    lines = ["prep," + ",".join(t.effect_labels)]
    for j, p in enumerate(t.preps):
        lines.append(p + "," + ",".join(str(la.scalar_to_json(x)) if not noise else repr(float(x)) for x in T[:, j]))
    return "\n".join(lines) + "\n"


def test_ingest_exact(gbit):
    t, nt = app.ingest(table_csv(gbit))
    assert t.exact and nt.epsilon == 0


def test_ingest_perturbed_rank(gbit):
    t, nt = app.ingest(table_csv(gbit, noise=1e-3), epsilon=2e-3)
    assert not t.exact
    rank, s = app.rank_report(nt, 1e-2)
    assert rank == 3 and len(s) >= 3 and s[3] < 1e-2


def test_ingest_normalization_violation():
    csv = "prep,0|M,1|M\na,1,0.5\n"
    with pytest.raises(NormalizationViolation):
        app.ingest(csv)
    with pytest.raises(NormalizationViolation):
        app.ingest(csv, epsilon=0.01)
    # within epsilon per outcome is tolerated
    app.ingest("prep,0|M,1|M\na,0.5,0.505\n", epsilon=0.01)
    with pytest.raises(MalformedInput):
        app.ingest(csv, epsilon=-1)


def test_depolarize_and_expand(gbit):
    h = app.depolarize(gbit, F(1, 2))
    assert validate(h).ok
    assert all(max(abs(x) for x in s[1:]) == F(1, 2) for s in h.states.vertices)
    assert app.depolarize(gbit, 0).states.vertices.tolist() == gbit.states.vertices.tolist()
    x = app.shrink(gbit, F(1, 4), F(1, 4))
    assert validate(x).ok
    assert all(gbit.states.contains(v) for v in x.states.vertices)
    assert all(gbit.effects.contains(v) for v in x.effects.vertices)
    y = app.grow(gbit, F(1, 4), F(1, 4))
    assert all(y.states.contains(v) for v in gbit.states.vertices)
    with pytest.raises(ValueError):
        app.depolarize(gbit, F(3, 2))


def test_robustness_radius(rebit, gbit):
    assert app.robustness_radius(rebit) == 0.0
    assert app.robustness_radius(canonical_simplicial(3)) == 0.0
    r = app.robustness_radius(gbit)
    assert 0 < r < 1
    assert embed.decide(app.depolarize(gbit, F(r))).embeddable
    assert not embed.decide(app.depolarize(gbit, F(r) - F(1, 1000))).embeddable


def test_noise_radius(gbit):
    assert app.noise_radius(app.PointEstimate(gbit, 0.0, 0.0)) == 0
    assert 0 < app.noise_radius(app.PointEstimate(gbit, 0.01, 0.01)) < 0.1
    assert app.noise_radius(app.PointEstimate(gbit, 10.0, 0.0)) == 1.0


def test_verdict_exact():
    _, nt = app.ingest(table_csv(catalog("gbit")))
    v = app.verdict(nt)
    assert isinstance(v, app.Nonclassical) and v.exit_code == 3
    assert v.r_eps == 0 and 0 < v.margin < 1 and v.r_star == pytest.approx(0.29296875)
    # the margin is how far the bodies can contract before embedding
    assert not embed.decide(app.shrink(v.inner, F(v.margin) - F(1, 1000), F(v.margin) - F(1, 1000))).embeddable
    assert embed.verify_certificate(v.inner, v.certificate, None)
    _, nt = app.ingest(table_csv(canonical_simplicial(3)))
    v = app.verdict(nt)
    assert isinstance(v, app.Classical) and v.exit_code == 0 and v.margin > 0
    assert "verdict" in v.to_json()


def test_verdict_noisy():
    g = catalog("gbit")
    _, nt = app.ingest(table_csv(g, noise=1e-3), epsilon=1e-3)
    v = app.verdict(nt)
    assert isinstance(v, app.Nonclassical) and 0 < v.r_eps < v.r_star
    _, nt = app.ingest(table_csv(g, noise=0.2, seed=3), epsilon=0.2)
    v = app.verdict(nt)
    assert isinstance(v, app.Inconclusive) and v.exit_code == 4 and v.reasons


def test_verdict_classical_noisy():
    _, nt = app.ingest(table_csv(canonical_simplicial(2), noise=1e-3), epsilon=1e-3)
    assert not isinstance(app.verdict(nt), app.Nonclassical)


def test_verdict_rank_two_with_mixtures_is_classical():
    csv = "prep,h|flip,t|flip\nH,0.999,0.001\nT,0.004,0.996\nfair,0.502,0.498\n"
    _, nt = app.ingest(csv, epsilon=1e-2)
    v = app.verdict(nt)
    assert isinstance(v, app.Classical) and v.exit_code == 0


def test_verdict_monotone_in_epsilon():
    """Growing the uncertainty can only weaken a Nonclassical verdict."""
    csv = table_csv(catalog("gbit"), noise=1e-3)
    seen_weak = False
    for eps in (1e-3, 5e-3, 0.02, 0.1, 0.3):
        _, nt = app.ingest(csv, epsilon=eps)
        v = app.verdict(nt)
        if seen_weak:
            assert not isinstance(v, app.Nonclassical)
        if not isinstance(v, app.Nonclassical):
            seen_weak = True
        else:
            assert v.margin >= 0


def test_large_epsilon_never_nonclassical():
    r_star = app.robustness_radius(catalog("gbit"))
    _, nt = app.ingest(table_csv(catalog("gbit")), epsilon=r_star + 0.01)
    assert not isinstance(app.verdict(nt), app.Nonclassical)


def test_robustness_monotone_under_adding_effects(gbit):
    # a subset of the effect vertices
    E = [e for e in gbit.effects.vertices]
    sub = Gpt.build(gbit.states.vertices, np.array(E[:4], dtype=object), gbit.unit)
    assert app.robustness_radius(sub) <= app.robustness_radius(gbit)
    half = catalog("restricted_square", sharpness=F(1, 2))
    assert app.robustness_radius(half) <= app.robustness_radius(gbit)
