"""Closed-form stability conditions, the ``g`` diagnostic and spectral bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .model import ShockParams, coefficient_functions, profile_rhs, rh_coefficient


@dataclass(frozen=True)
class ConditionReport:
    lhs_value: float
    which: str

    @property
    def holds(self) -> bool:
        return self.lhs_value >= 0.0


def _mn_lhs(gamma, v_plus, a):
    x = v_plus ** (gamma + 1.0) / (a * gamma)
    return x * x + 2.0 * (gamma - 1.0) * x - (gamma - 1.0)


def _sharp_poly(v, gamma, a):
    # bracketed polynomial of the closed form of g; its value at v_+ is the sharp condition
    g = gamma
    return (
        (g + 1.0) * v ** (g + 2.0)
        + v**g * (g - 1.0) * ((g + 1.0) * v - (a + 1.0) * g) ** 2
        + a * g * (g * g - 1.0) * (g + 2.0) * v
        - a * (a + 1.0) * g * g * (g * g - 1.0)
    )


def mn_condition(params: ShockParams) -> ConditionReport:
    """Small-amplitude sufficient condition with ``x = v_+^(g+1) / (a g)``."""
    return ConditionReport(float(_mn_lhs(params.gamma, params.v_plus, params.a)), "MN_condition")


def sharp_condition(params: ShockParams) -> ConditionReport:
    """Sharp form of the energy condition, evaluated at ``v = v_+``."""
    return ConditionReport(
        float(_sharp_poly(params.v_plus, params.gamma, params.a)), "sharp_condition"
    )


def g_eval(vhat, params: ShockParams):
    """Weight ``g(v)`` of the energy identity, from its factored closed form.

    Vanishes at both endstates since ``v_x = 0`` there.
    """
    v = np.asarray(vhat, dtype=float)
    g, a = params.gamma, params.a
    vx, h, _, _ = coefficient_functions(v, params)
    out = -a * vx * v ** (g - 1.0) / (2.0 * h**3) * _sharp_poly(v, g, a)
    out = np.where((v <= params.v_plus) | (v >= 1.0), 0.0, out)
    return out if out.ndim else float(out)


def g_defining(vhat, params: ShockParams, step: float = 5e-3):
    """``-(1/2)[(v^(g+1)/h)' + (v^g/h)'']`` by five-point central differences in ``v``.

    Derivatives along ``x`` are taken through ``v_x = H_rhs(v)``.  Kept as an
    independent cross-check of :func:`g_eval`.  The defining terms cancel
    heavily for strong shocks, so expect only about three correct digits
    there; use extended precision for a tighter oracle.
    """
    v = np.asarray(vhat, dtype=float)
    g, a = params.gamma, params.a

    def h(w):
        return -(w ** (g + 1.0)) + a * (g - 1.0) + (a + 1.0) * w**g

    def big_g(w):
        return w ** (g + 1.0) / h(w)

    def big_k(w):
        return w**g / h(w)

    # h ~ 1 - v + a g near v = 1, so the step also scales with that distance
    d = step * np.minimum(v, 1.0 + a * g - v)

    def d1(fn):
        return (fn(v - 2 * d) - 8 * fn(v - d) + 8 * fn(v + d) - fn(v + 2 * d)) / (12 * d)

    def d2(fn):
        return (
            -fn(v - 2 * d) + 16 * fn(v - d) - 30 * fn(v) + 16 * fn(v + d) - fn(v + 2 * d)
        ) / (12 * d * d)

    def rhs(w):
        return profile_rhs(w, params)

    vx = rhs(v)
    return -0.5 * (d1(big_g) * vx + d2(big_k) * vx * vx + d1(big_k) * d1(rhs) * vx)


def hf_bound(gamma: float) -> float:
    """Bound on ``Re(lam) + |Im(lam)|`` for unstable eigenvalues, ``(sqrt(g) + 1/2)^2``."""
    if gamma < 1.0:
        raise ValueError("gamma must be >= 1")
    return (math.sqrt(gamma) + 0.5) ** 2


@dataclass(frozen=True)
class Boundary:
    gamma: float
    which: str
    v_plus: float | None
    mach: float | None

    @property
    def exists(self) -> bool:
        return self.v_plus is not None


def stability_boundary(
    gamma: float, which: str = "sharp", tol: float = 1e-13, bracket=(1e-12, 1.0 - 1e-9)
) -> Boundary:
    """Root ``v_+*`` of the chosen condition's left-hand side, by bisection in ``log v_+``.

    At ``gamma = 1`` both conditions hold for every ``v_+`` and no boundary
    exists; the same is reported if the bracket has no sign change.
    """
    if which not in ("sharp", "mn"):
        raise ValueError("which must be 'sharp' or 'mn'")
    if gamma <= 1.0:
        return Boundary(gamma, which, None, None)

    def lhs(logv):
        vp = math.exp(logv)
        a = rh_coefficient(gamma, vp)
        if which == "mn":
            return _mn_lhs(gamma, vp, a)
        return _sharp_poly(vp, gamma, a)

    lo, hi = math.log(bracket[0]), math.log(bracket[1])
    if lhs(lo) * lhs(hi) > 0:
        return Boundary(gamma, which, None, None)
    root = math.exp(bisect(lhs, lo, hi, xtol=tol, maxiter=400))
    return Boundary(gamma, which, root, ShockParams(gamma, root).mach)


def boundary_table(gammas, tol: float = 1e-13):
    """Rows ``(gamma, vplus_mn, vplus_sharp, mach_mn, mach_sharp)``."""
    rows = []
    for g in gammas:
        mn = stability_boundary(g, "mn", tol)
        sh = stability_boundary(g, "sharp", tol)
        rows.append(
            (
                float(g),
                mn.v_plus if mn.exists else math.nan,
                sh.v_plus if sh.exists else math.nan,
                mn.mach if mn.exists else math.nan,
                sh.mach if sh.exists else math.nan,
            )
        )
    return rows
