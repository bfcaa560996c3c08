import cmath

import numpy as np
import pytest

from evanshock.model import ShockParams, coefficient_functions
from evanshock.spectral import (
    KatoStepError, KatoTracker, SplittingError, char_coeffs, cubic_roots, evans_matrix,
    kato_continue, kato_step, left_eigvec, projector, right_eigvec, stable_eigvecs,
    unstable_eigen,
)


def endstates(gamma, vp):
    p = ShockParams(gamma, vp)
    fm = float(coefficient_functions(1.0, p)[3])
    fp = float(coefficient_functions(vp, p)[3])
    return (1.0, fm), (vp, fp)


@pytest.mark.parametrize("coeffs", [(1, 2, 3), (0, 0, -1), (1 - 2j, 0.5j, -3 + 1j), (-3, 3, -1),
                                    (1e3, -2e-4, 1e-9)])
def test_cubic_vs_numpy(coeffs):
    ours = sorted(cubic_roots(*coeffs), key=lambda z: (round(z.real, 6), z.imag))
    ref = sorted(np.roots([1, *coeffs]), key=lambda z: (round(z.real, 6), z.imag))
    scale = max(1.0, max(abs(z) for z in ref))
    assert np.allclose(ours, ref, atol=1e-6 * scale)


def test_cubic_residuals_random():
    rng = np.random.default_rng(1)
    for _ in range(200):
        b, c, d = rng.normal(size=3) + 1j * rng.normal(size=3)
        for z in cubic_roots(b, c, d):
            assert abs(((z + b) * z + c) * z + d) < 1e-12 * (1 + abs(z)) ** 3


def test_char_poly_is_determinant():
    lam, w, f = 0.7 + 0.3j, 0.4, -1.2
    mat = evans_matrix(lam, w, f)
    for mu in (0.1, -2.0 + 1j, 3j):
        b, c, d = char_coeffs(lam, w, f)
        assert np.linalg.det(mu * np.eye(3) - mat) == pytest.approx(mu**3 + b * mu**2 + c * mu + d)


@pytest.mark.parametrize("gamma", [1.0, 1.4, 2.0, 3.0])
@pytest.mark.parametrize("vp", [1e-6, 1e-2, 0.5, 0.95])
def test_consistent_splitting(gamma, vp):
    (wm, fm), (wp, fp) = endstates(gamma, vp)
    for lam in (1.0, 1 + 2j, 0.3 - 4j, 1e-3):
        m = unstable_eigen(lam, wm, fm, "minus")
        pl = unstable_eigen(lam, wp, fp, "plus")
        assert sum(z.real > 0 for z in m.roots) == 1
        assert sum(z.real < 0 for z in pl.roots) == 2


def test_splitting_error_carries_data():
    with pytest.raises(SplittingError) as exc:
        unstable_eigen(-5.0, 1.0, 0.5, "minus")
    assert "-5" in str(exc.value)


def test_eigvecs():
    lam, w, f = 1.3 - 0.4j, 0.01, -3.0
    mat = evans_matrix(lam, w, f)
    e = unstable_eigen(lam, w, f, "plus")
    assert np.allclose(mat @ e.right, e.mu * e.right, atol=1e-12)
    assert np.allclose(e.left @ mat, e.mu * e.left, atol=1e-12)
    assert np.allclose(e.proj @ e.proj, e.proj, atol=1e-10)


@pytest.mark.parametrize("lam", [1.0, 0.2 + 3j, 2 - 1j])
def test_left_vector_annihilates_stable(lam):
    (_, _), (wp, fp) = endstates(5 / 3, 1e-4)
    left = unstable_eigen(lam, wp, fp, "plus").left
    for r in stable_eigvecs(lam, wp, fp):
        assert abs(left @ r) < 1e-12 * np.linalg.norm(left) * np.linalg.norm(r)


def test_conjugate_eigenvalues():
    (wm, fm), _ = endstates(1.4, 0.1)
    a = unstable_eigen(0.5 + 2j, wm, fm, "minus").mu
    b = unstable_eigen(0.5 - 2j, wm, fm, "minus").mu
    assert a == pytest.approx(b.conjugate(), abs=1e-14)


def test_kato_constant_family():
    mat = evans_matrix(1.0, 0.5, -1.0)
    e = unstable_eigen(1.0, 0.5, -1.0, "minus")
    out = kato_continue([e.proj] * 5, e.right)
    for r in out:
        assert np.allclose(r, e.right, atol=1e-14)
    assert mat.shape == (3, 3)


def test_kato_step_rejects_large_rotation():
    p_old = projector(np.array([1, 0, 0], complex), np.array([1, 0, 0], complex))
    p_new = projector(np.array([0, 1, 0], complex), np.array([0, 1, 0], complex))
    with pytest.raises(KatoStepError):
        kato_step(np.array([1, 0, 0], complex), p_old, p_new)


def _kato_ode_reference(w, f, lams):
    """Integrate r' = (P' P - P P') r with fine RK4 steps along a straight segment."""
    def proj(lam):
        return unstable_eigen(lam, w, f, "minus").proj

    r = unstable_eigen(lams[0], w, f, "minus").right
    n = 400
    for k in range(n):
        z0 = lams[0] + (lams[1] - lams[0]) * k / n
        h = (lams[1] - lams[0]) / n

        def rhs(z, vec):
            eps = 1e-6 * (lams[1] - lams[0]) / abs(lams[1] - lams[0])
            dp = (proj(z + eps) - proj(z - eps)) / (2 * eps) * (lams[1] - lams[0]) / abs(
                lams[1] - lams[0]) * abs(lams[1] - lams[0]) / (lams[1] - lams[0])
            p = proj(z)
            return (dp @ p - p @ dp) @ vec

        k1 = rhs(z0, r)
        k2 = rhs(z0 + h / 2, r + h / 2 * k1)
        k3 = rhs(z0 + h / 2, r + h / 2 * k2)
        k4 = rhs(z0 + h, r + h * k3)
        r = r + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return r


def test_kato_matches_transport_ode():
    w, f = 1.0, 0.9
    lams = (1.0, 1.0 + 1.0j)
    ref = _kato_ode_reference(w, f, lams)
    tr = KatoTracker(w, f, 1e-2, -1.0, max_step=0.01)
    st = tr.advance(tr.seed(1.0), lams[1])
    seed = tr.seed(1.0).r_minus
    ref = ref / unstable_eigen(1.0, w, f, "minus").right[0] * seed[0]
    assert np.allclose(st.r_minus, ref, atol=1e-7)


def test_trivial_monodromy():
    (wm, fm), (wp, fp) = endstates(5 / 3, 1e-4)
    tr = KatoTracker(wm, fm, wp, fp, max_step=0.01)
    st0 = tr.seed(3.0)
    st = tr.advance(st0, 3.0, path=lambda t: 2.0 + cmath.exp(2j * cmath.pi * t))
    assert np.allclose(st.r_minus, st0.r_minus, atol=1e-6)
    assert np.allclose(st.l_plus, st0.l_plus, atol=1e-6)


def test_mesh_independent():
    # the rank-one rotation is the exact transport, so the mesh only affects rounding
    (wm, fm), (wp, fp) = endstates(1.4, 1e-3)
    ref = KatoTracker(wm, fm, wp, fp, max_step=1e-4)
    target = 0.5 + 2.5j
    r_ref = ref.advance(ref.seed(0.5), target).r_minus
    errs = []
    for h in (0.2, 0.1, 0.05):
        tr = KatoTracker(wm, fm, wp, fp, max_step=h)
        errs.append(np.linalg.norm(tr.advance(tr.seed(0.5), target).r_minus - r_ref))
    assert max(errs) < 1e-9


def test_seed_requires_real():
    tr = KatoTracker(1.0, 0.5, 0.1, -1.0)
    with pytest.raises(ValueError):
        tr.seed(1 + 1j)


def test_null_vectors_match_numpy():
    mat = evans_matrix(0.8 + 0.1j, 0.3, -2.0)
    mu = unstable_eigen(0.8 + 0.1j, 0.3, -2.0, "x").mu
    r = right_eigvec(mat, mu)
    l_ = left_eigvec(mat, mu)
    assert np.linalg.norm((mat - mu * np.eye(3)) @ r) < 1e-12 * np.linalg.norm(r)
    assert np.linalg.norm(l_ @ (mat - mu * np.eye(3))) < 1e-12 * np.linalg.norm(l_)
