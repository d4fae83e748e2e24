from math import comb, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refkato.config import KahlerConfig, RiemannianConfig
from refkato.exterior import BidegreeSpace, ExteriorSpace, FormVector, blade
from refkato.steinweiss import (
    LinearMap,
    OperatorKind,
    image_overlap,
    normalization,
    projection_blocks,
    projection_pair,
    symbol,
    symbol_matrix,
    tensor_symbol,
    theta1,
    theta2,
    theta_for,
    theta_kahler,
    uniqueness_scan,
    verify_linalg_identities,
)

R2 = 1 / sqrt(2)


def riemannian(n_max):
    return [RiemannianConfig(n, k) for n in range(1, n_max + 1) for k in range(n + 1)]


def kahler(n_max):
    return [KahlerConfig(n, p, q) for n in range(1, n_max + 1) for p in range(n + 1) for q in range(n + 1)]


# -- intertwiners -----------------------------------------------------------------


def test_theta1_n2_k1():
    out = theta1(2, 1).matrix @ np.array([1.0])
    # slot-major layout: e1 (x) e2 sits at 0*2 + 1, e2 (x) e1 at 1*2 + 0
    np.testing.assert_allclose(out, [0, R2, -R2, 0], atol=1e-15)


def test_theta2_n2_k1():
    out = theta2(2, 1).matrix @ np.array([1.0])
    np.testing.assert_allclose(out, [-R2, 0, 0, -R2], atol=1e-15)


def test_theta_del_n1():
    th = theta_kahler("del", 1, 0, 0)
    assert th.domain == BidegreeSpace(1, 1, 0)
    np.testing.assert_allclose(th.matrix @ np.array([1.0]), [1.0, 0.0])


def test_theta_degree_errors():
    with pytest.raises(ValueError):
        theta1(3, 3)
    with pytest.raises(ValueError):
        theta2(3, 0)
    with pytest.raises(ValueError):
        theta_kahler("del", 2, 2, 0)
    with pytest.raises(ValueError):
        theta_kahler("delbar_star", 2, 1, 0)


def _all_thetas(n_max_real, n_max_complex):
    for cfg in riemannian(n_max_real):
        for tag in ("d", "d_star"):
            kind = OperatorKind(tag, cfg)
            if kind.defined:
                yield cfg, kind
    for cfg in kahler(n_max_complex):
        for tag in ("del", "delbar", "del_star", "delbar_star"):
            kind = OperatorKind(tag, cfg)
            if kind.defined:
                yield cfg, kind


def test_thetas_isometric():
    for cfg, kind in _all_thetas(6, 3):
        th = theta_for(kind).matrix
        np.testing.assert_allclose(th.conj().T @ th, np.eye(th.shape[1]), atol=1e-12, err_msg=str(kind))


def test_del_star_isometric_on_random_vectors():
    th = theta_kahler("del_star", 2, 1, 0)
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = rng.standard_normal(th.domain.dim) + 1j * rng.standard_normal(th.domain.dim)
        assert np.linalg.norm(th.matrix @ x) == pytest.approx(np.linalg.norm(x), abs=1e-12)


@pytest.mark.parametrize("n", range(2, 7))
def test_theta1_theta2_images_orthogonal(n):
    for k in range(1, n):
        g = theta1(n, k).matrix.T @ theta2(n, k).matrix
        assert np.abs(g).max(initial=0) < 1e-12


def test_section_property_riemannian_and_kahler():
    """``Pi_i theta_i = id`` for all six intertwiners (complex n <= 3 here; n <= 6 in the acceptance suite)."""
    for cfg, kind in _all_thetas(6, 3):
        fam = "hodge_de_rham" if isinstance(cfg, RiemannianConfig) else ("L1" if kind.tag in ("del", "del_star") else "L2")
        pi = projection_blocks(cfg, fam)[kind.tag]
        th = theta_for(kind)
        np.testing.assert_allclose((pi @ th).matrix, np.eye(th.domain.dim), atol=1e-12, err_msg=str(kind))


def test_del_left_inverse_with_explicit_scale():
    n, p, q = 2, 0, 1
    cfg = KahlerConfig(n, p, q)
    s = tensor_symbol(OperatorKind("del", cfg)).matrix
    th = theta_kahler("del", n, p, q).matrix
    np.testing.assert_allclose((-1j / sqrt(p + 1)) * s @ th, np.eye(th.shape[1]), atol=1e-12)


# -- symbols --------------------------------------------------------------------


def test_symbol_examples():
    cfg = RiemannianConfig(2, 1)
    s = symbol(OperatorKind("d", cfg), [1.0, 0.0])
    out = s(blade(ExteriorSpace(2, 1), 2))
    np.testing.assert_allclose(out.coeffs, [1j])
    s = symbol(OperatorKind("d_star", RiemannianConfig(2, 2)), [1.0, 0.0])
    out = s(blade(ExteriorSpace(2, 2), 1, 2))
    np.testing.assert_allclose(out.coeffs, [0, -1j])


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_del_symbol_norm(n, seed):
    rng = np.random.default_rng(seed)
    p, q = int(rng.integers(0, n)), int(rng.integers(0, n + 1))
    xi = rng.standard_normal(2 * n)
    xi /= np.linalg.norm(xi)
    s = symbol_matrix("del", KahlerConfig(n, p, q), xi)
    assert np.linalg.norm(s, 2) == pytest.approx(R2, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_symbol_linear_in_xi(n, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, n))
    cfg = RiemannianConfig(n, k)
    a, b = rng.standard_normal(n), rng.standard_normal(n)
    for tag in ("d", "d_star"):
        if not OperatorKind(tag, cfg).defined:
            continue
        lhs = symbol_matrix(tag, cfg, 2 * a - 3 * b)
        rhs = 2 * symbol_matrix(tag, cfg, a) - 3 * symbol_matrix(tag, cfg, b)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_d_star_symbol_is_adjoint_of_d():
    # sigma(d*) on degree k+1 is the adjoint of sigma(d) on degree k
    rng = np.random.default_rng(0)
    for n in range(1, 6):
        for k in range(n):
            xi = rng.standard_normal(n)
            sd = symbol_matrix("d", RiemannianConfig(n, k), xi)
            sds = symbol_matrix("d_star", RiemannianConfig(n, k + 1), xi)
            np.testing.assert_allclose(sds, sd.conj().T, atol=1e-12)


def test_operator_kind_validation():
    with pytest.raises(ValueError):
        OperatorKind("del", RiemannianConfig(2, 1))
    with pytest.raises(ValueError):
        OperatorKind("d", KahlerConfig(2, 1, 0))
    assert not OperatorKind("d", RiemannianConfig(3, 3)).defined
    assert OperatorKind("d_star", RiemannianConfig(3, 3)).defined


def test_linear_map_shape_and_composition():
    a = ExteriorSpace(3, 1)
    b = ExteriorSpace(3, 2)
    with pytest.raises(ValueError):
        LinearMap(a, b, np.zeros((2, 3)))
    m = LinearMap(a, b, np.ones((3, 3)))
    with pytest.raises(ValueError):
        m @ m
    assert (m.H @ m).matrix.shape == (3, 3)


# -- projections -----------------------------------------------------------------


def test_pi_e1_e1_n2():
    pi, _ = projection_pair(RiemannianConfig(2, 1), "hodge_de_rham")
    t = np.zeros(4)
    t[0] = 1.0
    out = pi.matrix @ t
    # codomain Lambda^2 (+) Lambda^0
    np.testing.assert_allclose(out, [0, -R2], atol=1e-15)


def test_pi_of_theta_sum_is_identity():
    for cfg in riemannian(5):
        pi, _ = projection_pair(cfg, "hodge_de_rham")
        blocks = [theta_for(OperatorKind(t, cfg)).matrix for t in ("d", "d_star") if OperatorKind(t, cfg).defined]
        th = np.hstack(blocks)
        np.testing.assert_allclose(pi.matrix @ th, np.eye(th.shape[1]), atol=1e-12)


def test_projection_rank():
    for cfg in riemannian(6):
        n, k = cfg.n, cfg.k
        pi, _ = projection_pair(cfg, "hodge_de_rham")
        expected = (comb(n, k + 1) if k < n else 0) + (comb(n, k - 1) if k > 0 else 0)
        assert np.linalg.matrix_rank(pi.matrix) == expected


def test_edge_degrees_drop_empty_summand():
    pi, _ = projection_pair(RiemannianConfig(3, 0), "hodge_de_rham")
    assert [p.k for p in pi.codomain.parts] == [1]
    pi, _ = projection_pair(RiemannianConfig(3, 3), "hodge_de_rham")
    assert [p.k for p in pi.codomain.parts] == [2]


def test_complement_identity():
    for cfg in riemannian(5) + kahler(2):
        fams = ["hodge_de_rham"] if isinstance(cfg, RiemannianConfig) else ["L1", "L2"]
        for fam in fams:
            pi, perp = projection_pair(cfg, fam)
            total = pi.matrix.conj().T @ pi.matrix + perp.matrix.conj().T @ perp.matrix
            np.testing.assert_allclose(total, np.eye(len(total)), atol=1e-10)


def test_kernel_is_orthogonal_complement_of_image():
    for cfg in riemannian(5) + kahler(2):
        fams = ["hodge_de_rham"] if isinstance(cfg, RiemannianConfig) else ["L1", "L2"]
        for fam in fams:
            for tag, pi in projection_blocks(cfg, fam).items():
                th = theta_for(OperatorKind(tag, cfg)).matrix
                comp = np.eye(th.shape[0]) - th @ th.conj().T
                assert np.abs(pi.matrix @ comp).max(initial=0) < 1e-12


def test_projection_family_validation():
    with pytest.raises(ValueError):
        projection_pair(RiemannianConfig(2, 1), "L1")
    with pytest.raises(ValueError):
        projection_pair(KahlerConfig(2, 1, 1), "hodge_de_rham")


# -- identities, uniqueness, overlap ----------------------------------------------


@pytest.mark.parametrize("n,k", [(3, 1), (6, 3), (4, 4), (5, 2)])
def test_linalg_identities(n, k):
    r = verify_linalg_identities(n, k)
    assert r["max_residual"] < 1e-12


def test_linalg_identity_b_skipped_at_k0():
    r = verify_linalg_identities(3, 0)
    assert r["b"] is None
    assert any("skipped" in s for s in r["notes"])
    assert r["a"] is not None and r["a"] < 1e-12


def test_linalg_identities_range():
    with pytest.raises(ValueError):
        verify_linalg_identities(9, 1)


def test_uniqueness_d_n3_k1():
    rep = uniqueness_scan(OperatorKind("d", RiemannianConfig(3, 1)), [0.5, R2, 1.0])
    assert rep.passing == [R2]
    assert rep.exact


def test_uniqueness_d_star_n3_k1():
    cands = [0.5, R2, 1 / sqrt(3), 1.0]
    rep = uniqueness_scan(OperatorKind("d_star", RiemannianConfig(3, 1)), cands)
    assert rep.passing == [1 / sqrt(3)]


def test_uniqueness_negative_candidate_passes():
    rep = uniqueness_scan(OperatorKind("d", RiemannianConfig(3, 1)), [-R2, R2])
    assert rep.passing == [-R2, R2]
    assert rep.passing_moduli == {round(R2, 12)}


def test_gram_is_scalar():
    for cfg in riemannian(6):
        n, k = cfg.n, cfg.k
        for tag, c in (("d", k + 1), ("d_star", n - k + 1)):
            kind = OperatorKind(tag, cfg)
            if not kind.defined:
                continue
            s = tensor_symbol(kind).matrix
            np.testing.assert_allclose(s @ s.conj().T, c * np.eye(s.shape[0]), atol=1e-12)
            assert normalization(tag, cfg) == pytest.approx(1 / sqrt(c))


def test_image_overlap_examples():
    for n in range(2, 6):
        for k in range(1, n):
            assert image_overlap(theta1(n, k), theta2(n, k)) < 1e-12
    a = theta_kahler("del_star", 2, 1, 0)
    b = theta_kahler("delbar", 2, 1, 0)
    assert image_overlap(a, b) > 0.1
    assert image_overlap(a, a) == pytest.approx(1.0, abs=1e-12)


def test_image_overlap_n2_p1_q0_is_one():
    # im theta^{del*} at (2,1,0) is a line inside im theta^{delbar}; value frozen from the computation
    assert image_overlap(theta_kahler("del_star", 2, 1, 0), theta_kahler("delbar", 2, 1, 0)) == pytest.approx(1.0, abs=1e-12)


def test_image_overlap_errors():
    with pytest.raises(ValueError):
        image_overlap(theta1(3, 1), theta1(3, 0))
    z = LinearMap(ExteriorSpace(2, 1), theta1(2, 1).codomain, np.zeros((4, 2)))
    with pytest.raises(ValueError):
        image_overlap(theta1(2, 1), z)


def test_formvector_through_linear_map():
    th = theta1(3, 1)
    x = FormVector(th.domain, np.array([1.0, 2.0, 3.0]))
    y = th(x)
    assert y.space == th.codomain
    assert y.norm() == pytest.approx(x.norm())
    with pytest.raises(ValueError):
        th(FormVector(ExteriorSpace(3, 1), np.ones(3)))
