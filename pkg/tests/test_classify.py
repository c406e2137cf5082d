import numpy as np
import pytest

from bundlelab import classify
from bundlelab.blaschke import BlaschkeProduct, MoebiusTransform, eval_blaschke
from bundlelab.funcspec import BlaschkeSpec, ComposeSpec, PolySpec
from bundlelab.weights import WeightSequence

BERGMAN = WeightSequence.bergman(1)
HARDY = WeightSequence.hardy()
G = PolySpec((0, 1, 0, 2))


def _pair(z1, z2):
    return (
        ComposeSpec(G, BlaschkeSpec(BlaschkeProduct(z1))),
        ComposeSpec(G, BlaschkeSpec(BlaschkeProduct(z2))),
    )


def test_douglas_identity_for_z():
    cert = classify.douglas_intertwiner(
        BlaschkeProduct((0,), np.pi), HARDY, K=128, n_max=20, attach_riesz=False
    )
    assert cert.residual == 0.0
    assert cert.cond == pytest.approx(1.0, abs=1e-12)
    assert cert.accepted


def test_douglas_key_regime():
    cert = classify.douglas_intertwiner(
        BlaschkeProduct((0, 0.5)), BERGMAN, K=512, n_max=100, attach_riesz=False
    )
    assert cert.residual < 1e-10
    assert cert.cond_rel_change < 0.05
    assert cert.K == 512  # no ladder climb needed in the stable regime
    assert cert.accepted


def test_douglas_fails_on_intermediate_growth():
    recip_nln = WeightSequence.nln().dual()
    with pytest.warns(UserWarning, match="polynomial growth"):
        cert = classify.douglas_intertwiner(
            MoebiusTransform(0.5), recip_nln, K=256, n_max=60
        )
    assert not cert.accepted
    assert cert.riesz.verdict == "degenerating"


def test_moebius_match_identity_among_solutions():
    m = classify.moebius_match(PolySpec((0, 0, 1)), PolySpec((0, 0, 1)))
    assert m is not None
    # phi(z) = e^{i pi}(0 - z) is the identity; phi(z) = -z also matches z^2
    ids = [c for c in m.candidates if abs(c["theta"] - np.pi) < 1e-6]
    assert ids and abs(complex(*c["z0"]) if (c := ids[0])["z0"] else 0) < 1e-8


def test_moebius_match_recovers_parameters():
    g2 = ComposeSpec(PolySpec((0, 0, 1)), BlaschkeSpec(MoebiusTransform(0.3)))
    m = classify.moebius_match(PolySpec((0, 0, 1)), g2)
    assert m is not None
    assert m.transform.z0 == pytest.approx(0.3, abs=1e-6)
    assert m.transform.theta == pytest.approx(0.0, abs=1e-6)
    assert m.residual < 1e-8


def test_moebius_match_degree_mismatch_empty():
    assert classify.moebius_match(G, PolySpec((0, 0, 1))) is None


def test_moebius_match_functional_identity():
    phi_true = MoebiusTransform(0.25 - 0.15j, 1.1)
    g2 = ComposeSpec(G, BlaschkeSpec(phi_true))
    m = classify.moebius_match(G, g2)
    assert m is not None and m.residual < 1e-8
    from bundlelab.funcspec import RationalFunction

    g1 = RationalFunction.from_spec(G)
    g2r = RationalFunction.from_spec(g2)
    zs = 0.3 * np.exp(2j * np.pi * np.arange(12) / 12)
    dev = np.max(np.abs(g2r.value(zs) - g1.value(eval_blaschke(m.transform, zs))))
    assert dev < 1e-8


def test_jordan_trivial_for_indecomposable():
    j = classify.jordan(G, BERGMAN, attach_riesz=False)
    assert j.m == 1
    assert j.certificate is None
    assert j.direct_residual == 0.0


def test_jordan_composite():
    f = ComposeSpec(G, BlaschkeSpec(BlaschkeProduct((0, 0.4))))
    j = classify.jordan(f, BERGMAN, attach_riesz=False)
    assert j.m == 2
    assert j.certificate.accepted
    assert j.direct_residual < 1e-8
    assert j.checked_columns > 0


def test_jordan_pure_blaschke_on_hardy():
    # an order-2 product decomposes fully: trivial (Moebius) outer part
    B = BlaschkeProduct((0, 0.4), np.pi)
    j = classify.jordan(BlaschkeSpec(B), HARDY, attach_riesz=False)
    assert j.m == 2
    assert j.outer.coeffs.size < 60  # Moebius outer: short expansion
    assert j.direct_residual < 1e-10
    assert j.certificate.accepted


def test_similar_positive_pair():
    h1, h2 = _pair((0, 0.4), (0.2, -0.5))
    v = classify.similar(h1, h2, BERGMAN)
    assert v.status == "similar"
    assert v.exit_code == 0
    assert v.evidence["m1"] == v.evidence["m2"] == 2
    assert v.evidence["match"]["residual"] < 1e-8


def test_similar_order_mismatch():
    h1 = ComposeSpec(G, BlaschkeSpec(BlaschkeProduct((0, 0.4))))
    h3 = ComposeSpec(G, BlaschkeSpec(BlaschkeProduct((0.2, -0.5, 0.1))))
    v = classify.similar(h1, h3, BERGMAN)
    assert v.status == "not_similar"
    assert v.reason == "order mismatch"
    assert v.exit_code == 1


def test_similar_direct_square_pair():
    h1 = PolySpec((0, 0, 1))
    h2 = ComposeSpec(PolySpec((0, 0, 1)), BlaschkeSpec(MoebiusTransform(0.3)))
    v = classify.similar(h1, h2, BERGMAN)
    assert v.status == "similar"


def test_similar_symmetry():
    h1, h2 = _pair((0, 0.4), (0.2, -0.5))
    assert classify.similar(h1, h2, BERGMAN).status == classify.similar(
        h2, h1, BERGMAN
    ).status


def test_similar_moebius_precomposition():
    h1 = ComposeSpec(G, BlaschkeSpec(BlaschkeProduct((0, 0.4))))
    phi = MoebiusTransform(0.2 + 0.1j, 0.9)
    h2 = ComposeSpec(h1, BlaschkeSpec(phi))
    assert classify.similar(h1, h2, BERGMAN).status == "similar"


def test_kaplansky_consistency():
    h1, h2 = _pair((0, 0.4), (0.2, -0.5))
    double, single, consistent = classify.kaplansky(h1, h2, BERGMAN)
    assert double.status == single.status == "similar"
    assert double.evidence["m1_doubled"] == 4
    assert consistent
    h3 = ComposeSpec(G, BlaschkeSpec(BlaschkeProduct((0.2, -0.5, 0.1))))
    d2, s2, c2 = classify.kaplansky(h1, h3, BERGMAN)
    assert d2.status == s2.status == "not_similar"
    assert c2


def test_counterexample_probe_divergence():
    recip_nln = WeightSequence.nln().dual()
    rep = classify.counterexample_probe(0.5, recip_nln, n_max=200)
    assert rep.verdict == "no bounded similarity at probed scales"
    assert rep.slope > 0.05
    assert rep.cond_ratio > 1.5


def test_counterexample_probe_stable():
    rep = classify.counterexample_probe(0.5, BERGMAN, n_max=200)
    assert rep.verdict == "similarity-consistent"
    assert rep.growth_ratio < 1.1
    assert rep.cond_ratio < 1.1


def test_counterexample_probe_tiny_parameter():
    rep = classify.counterexample_probe(1e-6, HARDY, n_max=40)
    assert np.max(np.abs(rep.profile - 1.0)) < 1e-4


def test_verdict_serialization():
    h1, h2 = _pair((0, 0.4), (0.2, -0.5))
    v = classify.similar(h1, h2, BERGMAN)
    d = v.to_dict()
    assert d["status"] == "similar"
    assert "m1" in d["evidence"]


def test_certificate_residual_nonincreasing_under_doubling():
    # the residual is attributable to truncation only: doubling K cannot
    # worsen it beyond the roundoff floor
    c1 = classify.douglas_intertwiner(
        BlaschkeProduct((0, 0.5)), BERGMAN, K=256, n_max=40, attach_riesz=False
    )
    c2 = classify.douglas_intertwiner(
        BlaschkeProduct((0, 0.5)), BERGMAN, K=512, n_max=40, attach_riesz=False
    )
    floor = 1e-12
    assert c2.residual <= max(c1.residual, floor)
    assert abs(c2.cond - c1.cond) / c1.cond < 0.05
