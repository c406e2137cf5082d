
import numpy as np
import pytest

from bundlelab import frames, series
from bundlelab.blaschke import BlaschkeProduct
from bundlelab.errors import DomainError, NumericalSingularityError
from bundlelab.weights import WeightSequence

HARDY = WeightSequence.hardy()
BERGMAN = WeightSequence.bergman(1)


def test_monomial_frame_is_identity_block():
    F = frames.build_frame(BlaschkeProduct((0,), np.pi), HARDY, 10, 64)
    A = F.matrix("beta")
    assert np.allclose(A[:11], np.eye(11), atol=1e-14)
    assert np.max(np.abs(A[11:])) < 1e-14


def test_frame_column_is_geometric_kernel():
    # column (j=2, n=0) holds the kernel at 0.5: the geometric series
    F = frames.build_frame(BlaschkeProduct((0, 0.5)), HARDY, 4, 64)
    col = F.matrix("raw")[:, 1]
    assert np.allclose(col[:6], 0.5 ** np.arange(6), atol=1e-14)


def test_frame_column_against_series_oracle():
    B = BlaschkeProduct((0, 0.5))
    F = frames.build_frame(B, BERGMAN, 4, 64)
    from bundlelab.funcspec import BlaschkeSpec

    b = series.taylor(BlaschkeSpec(B), 63)
    kernel = series.geometric(0.0, 63)  # kernel direction at the zero 0
    col_ser = series.multiply(b, kernel)
    expect = col_ser.coeffs * BERGMAN.betas(63) / BERGMAN.beta(1)
    got = F.matrix("beta")[:, 1 * 2 + 0]
    assert np.allclose(got, expect, atol=1e-13)


def test_build_frame_rejects_repeated_zeros():
    with pytest.raises(DomainError, match="distinct"):
        frames.build_frame(BlaschkeProduct((0.3, 0.3)), HARDY, 4, 64)


def test_build_frame_normalizes_missing_origin():
    B = BlaschkeProduct((0.4, -0.2))
    F = frames.build_frame(B, HARDY, 4, 64)
    assert F.conjugator is not None
    assert any(abs(z) < 1e-12 for z in F.product.zeros)
    # the normalized product is the original precomposed with the conjugator
    from bundlelab.blaschke import eval_blaschke

    zs = 0.6 * np.exp(2j * np.pi * np.arange(9) / 9)
    lhs = eval_blaschke(F.product, zs)
    rhs = eval_blaschke(B, eval_blaschke(F.conjugator, zs))
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_gram_identity_for_monomial_frame():
    F = frames.build_frame(BlaschkeProduct((0,), np.pi), BERGMAN, 12, 64)
    G = frames.gram(F, "beta")
    assert np.allclose(G.matrix, np.eye(13), atol=1e-13)


def test_gram_hardy_block_structure():
    F = frames.build_frame(BlaschkeProduct((0, 0.5)), HARDY, 40, 256)
    G = frames.gram(F, "raw").matrix
    expected = np.array([[1.0, 1.0], [1.0, 4.0 / 3.0]])
    off = G.copy()
    for n in range(41):
        blk = G[2 * n : 2 * n + 2, 2 * n : 2 * n + 2]
        assert np.max(np.abs(blk - expected)) < 1e-8
        off[2 * n : 2 * n + 2, 2 * n : 2 * n + 2] = 0
    assert np.max(np.abs(off)) < 1e-8


def test_gram_tail_bounds_reported():
    F = frames.build_frame(BlaschkeProduct((0, 0.5)), HARDY, 10, 32)
    G = frames.gram(F, "raw")
    assert G.column_tails.shape == (22,)
    assert G.entry_tail_bound(21, 21) > 0


def test_riesz_monomial():
    rep = frames.riesz_bounds(frames.build_frame(BlaschkeProduct((0,), np.pi), HARDY, 16, 64))
    assert rep.c1 == pytest.approx(1.0, abs=1e-12)
    assert rep.c2 == pytest.approx(1.0, abs=1e-12)
    assert rep.verdict == "Riesz-consistent"


def test_riesz_key_regime_stability():
    F = frames.build_frame(BlaschkeProduct((0, 0.5)), BERGMAN, 50, 256)
    rep = frames.riesz_bounds(F)
    assert rep.verdict == "Riesz-consistent"
    assert rep.c1 > 0.01
    assert rep.stability["c1_rel_change"] <= 0.01
    assert rep.stability["c2_rel_change"] <= 0.01


def test_riesz_degenerating_on_intermediate_growth():
    recip_nln = WeightSequence.nln().dual()
    F = frames.moebius_frame(0.5, recip_nln, 60, 384)
    rep = frames.riesz_bounds(F)
    assert rep.verdict == "degenerating"
    ladder = rep.stability["ladder"]
    assert ladder[-1]["c2"] > 10 * ladder[0]["c2"]


def test_dual_frame_examples():
    F = frames.build_frame(BlaschkeProduct((0,), np.pi), HARDY, 12, 64)
    D = frames.dual_frame(F)
    assert D.residual < 1e-12
    assert np.allclose(D.matrix[:13], np.eye(13), atol=1e-12)
    F2 = frames.build_frame(BlaschkeProduct((0, 0.5)), HARDY, 30, 512)
    D2 = frames.dual_frame(F2)
    assert D2.residual < 1e-8
    assert D2.numerical


def test_dual_frame_degenerate_raises():
    recip_nln = WeightSequence.nln().dual()
    F = frames.moebius_frame(0.5, recip_nln, 120, 512)
    with pytest.raises(NumericalSingularityError):
        frames.dual_frame(F)


def test_kernel_matrix_examples():
    r = frames.kernel_matrix([0.0])
    assert r.matrix.tolist() == [[1.0]]
    assert r.inverse.tolist() == [[1.0]]
    r2 = frames.kernel_matrix([0.0, 0.5])
    assert np.allclose(r2.matrix, [[1, 1], [1, 4 / 3]])
    det = np.linalg.det(r2.matrix)
    assert det == pytest.approx(1.0 / 3.0, rel=1e-12)
    r3 = frames.kernel_matrix([0.0, 0.5, -0.5])
    assert np.allclose(r3.matrix, [[1, 1, 1], [1, 4 / 3, 0.8], [1, 0.8, 4 / 3]])
    assert r3.min_singular_value > 0
    assert np.max(np.abs(r3.matrix @ r3.inverse - np.eye(3))) < 1e-12


def test_kernel_matrix_validation():
    with pytest.raises(DomainError):
        frames.kernel_matrix([0.2, 0.2])
    with pytest.raises(DomainError):
        frames.kernel_matrix([1.0])


def test_cpb_identity_exact_for_z():
    rep = frames.cpb_check(BlaschkeProduct((0,), np.pi), HARDY, 10, 128)
    assert rep.max_dev < 1e-12


def test_cpb_identity_two_paths():
    rep = frames.cpb_check(BlaschkeProduct((0, 0.5)), HARDY, 30, 512)
    assert rep.max_dev < 1e-8
    rep2 = frames.cpb_check(BlaschkeProduct((0, 0.3j)), BERGMAN, 30, 512)
    assert rep2.max_dev < 1e-8


def test_cpb_needs_zero_at_origin():
    with pytest.raises(DomainError):
        frames.cpb_check(BlaschkeProduct((0.5,)), HARDY, 10, 128)


def test_moebius_duality_identity():
    rep = frames.moebius_duality_check(0.0, HARDY, 20, 128)
    assert rep.scale == 1.0 and rep.max_dev < 1e-12
    rep2 = frames.moebius_duality_check(0.5, HARDY, 40, 512)
    assert rep2.scale == pytest.approx(1.0 / 0.75)
    assert rep2.max_dev < 1e-8
    rep3 = frames.moebius_duality_check(0.3j, BERGMAN, 40, 512)
    assert rep3.scale == pytest.approx(1.0 / 0.91)
    assert rep3.max_dev < 1e-8


def test_column_norm_profile_regimes():
    r_h = frames.column_norm_profile(0.5, HARDY, 60)
    assert r_h[0] == 1.0
    assert np.max(r_h) / np.min(r_h[1:]) < 3.0
    r_b = frames.column_norm_profile(0.5, BERGMAN, 60)
    assert np.max(r_b[10:]) / np.min(r_b[10:]) < 1.5
    recip_nln = WeightSequence.nln().dual()
    r_n = frames.column_norm_profile(0.5, recip_nln, 120)
    assert np.all(np.diff(r_n[20:]) > 0)
    assert r_n[120] > 2 * r_n[20]


def test_derivative_power_norms_dominate_bound():
    for t in (0.3, 0.5, 0.7):
        for N in range(1, 6):
            lhs = frames.moebius_derivative_power_norm(t, N)
            assert lhs >= frames.derivative_power_lower_bound(t, N)


def test_moebius_frame_keeps_kernel_point():
    F = frames.moebius_frame(0.5, HARDY, 8, 64)
    assert F.conjugator is None
    assert F.product.zeros == (0.5,)
