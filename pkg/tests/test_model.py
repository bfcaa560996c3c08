import math
import warnings

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from evanshock.model import (
    DomainError, ProfileError, ShockParams, ValidationError, WeakShockWarning, center_value,
    coefficient_functions, decay_envelopes, mach, profile_rhs, rh_coefficient, solve_profile,
    validate_profile_decay, vplus_from_mach,
)


def rh_mp(gamma, vp):
    mpmath.mp.dps = 50
    g, v = mpmath.mpf(gamma), mpmath.mpf(vp)
    return float(v**g * (1 - v) / (1 - v**g))


class TestRH:
    def test_gamma_one(self):
        assert rh_coefficient(1.0, 0.5) == 0.5

    def test_monatomic_value(self):
        assert rh_coefficient(5 / 3, 1e-4) == pytest.approx(2.1542e-7, rel=1e-4)

    @pytest.mark.parametrize("gamma", [1.0001, 1.2, 1.4, 5 / 3, 2.0, 3.0])
    @pytest.mark.parametrize("vp", [1e-9, 1e-4, 0.3, 0.9, 1 - 1e-8])
    def test_against_mpmath(self, gamma, vp):
        assert rh_coefficient(gamma, vp) == pytest.approx(rh_mp(gamma, vp), rel=1e-12)

    @pytest.mark.parametrize("gamma", [1.0, 1.2, 2.0, 3.0])
    @pytest.mark.parametrize("vp", [1e-8, 1e-3, 0.5, 0.99])
    def test_coefficient_bracket_and_mach_identity(self, gamma, vp):
        # (1 - v) / (1 - v^g) lies in [1/g, 1]
        p = ShockParams(gamma, vp)
        assert vp**gamma / gamma * (1 - 1e-13) <= p.a <= vp**gamma * (1 + 1e-13)
        assert p.mach**2 * gamma * p.a == pytest.approx(1.0, abs=1e-12)

    def test_weak_limit(self):
        with pytest.warns(WeakShockWarning):
            assert rh_coefficient(1.4, 1 - 1e-13) == 1 / 1.4
        assert rh_coefficient(1.4, 1 - 1e-9) == pytest.approx(1 / 1.4, rel=1e-8)

    @pytest.mark.parametrize("vp", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, vp):
        with pytest.raises(DomainError):
            rh_coefficient(1.4, vp)

    def test_params_json(self):
        p = ShockParams(1.4, 0.5)
        assert set(p.to_dict()) == {"gamma", "v_plus", "a", "mach"}
        assert '"gamma"' in p.to_json()


class TestMach:
    def test_monatomic(self):
        assert mach(ShockParams(5 / 3, 1e-4)) == pytest.approx(1669, rel=1e-3)

    def test_diatomic(self):
        assert mach(ShockParams(1.4, 9e-6)) == pytest.approx(2877, rel=1e-3)

    def test_weak(self):
        assert mach(ShockParams(2.0, 1 - 1e-9)) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("gamma", [1.0, 1.4, 3.0])
    @pytest.mark.parametrize("M", [1.01, 1.6, 30.0, 3000.0, 1e4])
    def test_roundtrip(self, gamma, M):
        vp = vplus_from_mach(gamma, M)
        assert mach(ShockParams(gamma, vp)) == pytest.approx(M, rel=1e-11)

    def test_subsonic(self):
        with pytest.raises(DomainError):
            vplus_from_mach(1.4, 0.9)


class TestCoefficients:
    def test_endstates(self):
        p = ShockParams(5 / 3, 1e-4)
        assert profile_rhs(1.0, p) == 0.0
        assert profile_rhs(p.v_plus, p) == 0.0

    def test_h_at_one(self):
        p = ShockParams(2.0, 0.01)
        _, h, cap_h, f = coefficient_functions(1.0, p)
        assert h == pytest.approx(p.a * p.gamma, rel=1e-14)
        assert f == pytest.approx(1 - p.a * p.gamma, rel=1e-14)

    def test_cap_h_max(self):
        p = ShockParams(1.4, 0.01)
        v = np.linspace(p.v_plus, 1, 2001)
        cap = coefficient_functions(v, p)[2]
        expect = p.gamma * (1 - p.v_plus) / (1 - p.v_plus**p.gamma)
        assert cap[0] == pytest.approx(expect, rel=1e-12)
        assert np.all(np.diff(cap) < 0)
        assert expect <= p.gamma

    def test_negative_interior(self):
        p = ShockParams(3.0, 1e-6)
        v = np.geomspace(p.v_plus * 1.0001, 0.9999, 500)
        assert np.all(profile_rhs(v, p) < 0)

    def test_direct_formula(self):
        p = ShockParams(1.4, 0.2)
        v = np.linspace(0.25, 0.95, 11)
        direct = v * (v - 1 + p.a * (v ** -p.gamma - 1))
        assert np.allclose(profile_rhs(v, p), direct, rtol=1e-12, atol=0)

    def test_domain(self):
        p = ShockParams(1.4, 0.2)
        with pytest.raises(DomainError):
            coefficient_functions(0.1, p)


class TestProfile:
    def test_monatomic_decay(self):
        prof = solve_profile(ShockParams(5 / 3, 1e-4), 12.0)
        assert 1 - prof(-12.0) <= 0.25
        assert prof(12.0) - 1e-4 <= math.exp(-9) / 12

    @pytest.mark.parametrize("gamma,vp", [(1.0, 0.5), (1.4, 1e-3), (3.0, 1e-6)])
    def test_monotone_and_bounded(self, gamma, vp):
        prof = solve_profile(ShockParams(gamma, vp), 12.0)
        assert np.all(np.diff(prof.v) < 0)
        assert np.all((prof.v > vp) & (prof.v < 1))

    def test_midpoint_centering(self):
        prof = solve_profile(ShockParams(1.0, 0.5), 12.0)
        assert prof(0.0) == pytest.approx(0.75, abs=1e-12)

    def test_quadrature_oracle(self):
        # x(v) = int_{v0}^{v} dw / H_rhs(w) inverts the profile independently
        p = ShockParams(1.4, 1e-3)
        prof = solve_profile(p, 10.0)
        v0 = center_value(p)
        for target in (0.9, 0.5, 0.01, 0.002):
            x, _ = quad(lambda w: 1.0 / profile_rhs(w, p), v0, target, epsabs=1e-13, epsrel=1e-12)
            assert prof(x) == pytest.approx(target, rel=1e-8)

    def test_derivative_matches_rhs(self):
        p = ShockParams(5 / 3, 1e-4)
        prof = solve_profile(p, 8.0)
        assert np.allclose(prof.dv, profile_rhs(prof.v, p), rtol=1e-8, atol=1e-14)
        # between nodes the cubic Hermite derivative is third order in the spacing
        xq = np.linspace(-7.9, 7.9, 101) + 3.7e-4
        assert np.allclose(prof(xq, 1), profile_rhs(prof(xq), p), rtol=1e-6, atol=1e-12)

    def test_tolerance_consistency(self):
        p = ShockParams(2.0, 1e-3)
        a = solve_profile(p, 8.0, tol=1e-8)
        b = solve_profile(p, 8.0, tol=1e-9)
        assert np.max(np.abs(a.v - b.v)) <= 10 * 1e-8

    def test_domain_too_short(self):
        with pytest.raises(ProfileError, match="need half_length"):
            solve_profile(ShockParams(5 / 3, 1e-4), 2.0, endstate_tol=1e-6)

    def test_csv(self, tmp_path):
        prof = solve_profile(ShockParams(1.4, 0.5), 1.0, spacing=0.25)
        path = tmp_path / "p.csv"
        prof.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,vhat,vhat_prime"
        assert len(lines) == 10
        assert float(lines[5].split(",")[1]) == prof.v[4]

    def test_bad_args(self):
        with pytest.raises(ValueError):
            solve_profile(ShockParams(1.4, 0.5), -1.0)


class TestDecay:
    @pytest.mark.parametrize("gamma", [1.0, 2.0, 3.0])
    def test_bounds_hold(self, gamma):
        rep = validate_profile_decay(solve_profile(ShockParams(gamma, 1e-4), 14.0))
        assert rep.applicable and rep.ok
        assert rep.worst_margin >= -1e-6

    def test_edge_of_applicability(self):
        rep = validate_profile_decay(solve_profile(ShockParams(3.0, 1 / 12), 12.0))
        assert rep.applicable and rep.ok

    def test_tight_at_center(self):
        prof = solve_profile(ShockParams(2.0, 1e-4), 12.0)
        assert abs(prof(0.0) - 1e-4) == pytest.approx(1 / 12, rel=1e-12)
        assert decay_envelopes(0.0) == pytest.approx(1 / 12)

    def test_not_applicable(self):
        rep = validate_profile_decay(solve_profile(ShockParams(1.4, 0.5), 12.0))
        assert not rep.applicable
        rep = validate_profile_decay(solve_profile(ShockParams(1.4, 1e-3), 12.0, center="midpoint"))
        assert not rep.applicable

    def test_violation_detected(self):
        prof = solve_profile(ShockParams(2.0, 1e-4), 12.0)
        bad = type(prof)(prof.params, prof.x, np.clip(prof.v + 0.2, None, 1.0), prof.dv,
                         prof.center_value)
        with pytest.raises(ValidationError):
            validate_profile_decay(bad)
        assert not validate_profile_decay(bad, raise_on_fail=False).ok


def test_physical_range_warning():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        ShockParams(3.5, 0.5)
    assert any("outside" in str(w.message) for w in rec)
