"""Shock parameters, Rankine-Hugoniot algebra and the viscous profile.

All quantities live in the rescaled Lagrangian frame where the left
endstate is ``v_- = 1`` and ``0 < v_+ < 1``.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

#: Centering offset above ``v_+`` for strong shocks (profile bounds apply).
STRONG_CENTER_OFFSET = 1.0 / 12.0
WEAK_LIMIT_TOL = 1e-12


class DomainError(ValueError):
    """Argument outside the physical parameter range."""


class ProfileError(RuntimeError):
    """Profile integration failed or the domain is too short."""


class WeakShockWarning(UserWarning):
    pass


def _one_minus_pow(x, gamma):
    # 1 - x**gamma without cancellation for x near 1
    return -math.expm1(gamma * math.log(x))


def rh_coefficient(gamma: float, v_plus: float) -> float:
    """Rankine-Hugoniot coefficient ``a = v+^g (1 - v+) / (1 - v+^g)``.

    Within 1e-12 of ``v_+ = 1`` the weak-shock limit ``1/gamma`` is returned
    and a :class:`WeakShockWarning` is emitted.
    """
    if not (0.0 < v_plus < 1.0):
        raise DomainError(f"v_plus must lie in (0, 1), got {v_plus!r}")
    if gamma < 1.0:
        raise DomainError(f"gamma must be >= 1, got {gamma!r}")
    if 1.0 - v_plus < WEAK_LIMIT_TOL:
        warnings.warn("weak-shock limit: a -> 1/gamma", WeakShockWarning, stacklevel=2)
        return 1.0 / gamma
    if gamma == 1.0:
        return v_plus
    return v_plus**gamma * (1.0 - v_plus) / _one_minus_pow(v_plus, gamma)


@dataclass(frozen=True)
class ShockParams:
    """A shock of the rescaled p-system, fixed by ``(gamma, v_plus)``."""

    gamma: float
    v_plus: float
    a: float = field(init=False)
    mach: float = field(init=False)
    weak_limit: bool = field(init=False)

    def __post_init__(self):
        if not (1.0 <= self.gamma <= 3.0):
            warnings.warn(
                f"gamma={self.gamma} outside the physical range [1, 3]", stacklevel=3
            )
        weak = 0.0 < self.v_plus < 1.0 and 1.0 - self.v_plus < WEAK_LIMIT_TOL
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", WeakShockWarning)
            a = rh_coefficient(self.gamma, self.v_plus)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "mach", 1.0 / math.sqrt(self.gamma * a))
        object.__setattr__(self, "weak_limit", weak)

    @classmethod
    def from_mach(cls, gamma: float, mach: float) -> "ShockParams":
        return cls(gamma, vplus_from_mach(gamma, mach))

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "v_plus": self.v_plus, "a": self.a, "mach": self.mach}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def mach(params: ShockParams) -> float:
    """Mach number, ``M**2 = 1 / (gamma a)``."""
    return 1.0 / math.sqrt(params.gamma * params.a)


def vplus_from_mach(gamma: float, mach_number: float, rtol: float = 1e-12) -> float:
    """Invert :func:`mach` for ``v_plus`` by bracketed root finding in ``log v_+``.

    The bracket is seeded from the hypersonic asymptotics
    ``v_+ ~ (gamma M^2)^(-1/gamma)``.
    """
    if mach_number < 1.0:
        raise DomainError(f"Mach number must be >= 1 for a shock, got {mach_number!r}")
    if mach_number == 1.0:
        return 1.0 - WEAK_LIMIT_TOL
    if gamma < 1.0:
        raise DomainError(f"gamma must be >= 1, got {gamma!r}")

    # log(gamma a M^2) is increasing in log v_+
    def resid(logv):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", WeakShockWarning)
            a = rh_coefficient(gamma, math.exp(logv))
        return math.log(gamma * a) + 2.0 * math.log(mach_number)

    seed = -(math.log(gamma) + 2.0 * math.log(mach_number)) / gamma
    lo = min(seed, -1e-3) - 1.0
    hi = min(seed + 1.0, math.log1p(-1e-15))
    while resid(lo) > 0.0:
        lo -= 2.0
    while resid(hi) < 0.0:
        if hi >= math.log1p(-1e-15):
            break
        hi = min(hi + 1.0, math.log1p(-1e-15))
    logv = brentq(resid, lo, hi, xtol=1e-300, rtol=max(rtol * 1e-2, 4.5e-16), maxiter=500)
    return math.exp(logv)


# ---------------------------------------------------------------------------
# coefficient functions


def _check_range(vhat, params, slack=1e-12):
    v = np.asarray(vhat, dtype=float)
    if np.any(v < params.v_plus * (1.0 - slack)) or np.any(v > 1.0 + slack):
        raise DomainError(f"vhat outside [v_plus, 1] = [{params.v_plus}, 1]")
    return v


def profile_rhs(vhat, params: ShockParams):
    """``H_rhs(v) = v (v - 1 + a (v^-g - 1))``, evaluated without cancellation.

    Near ``v_+`` the factored form
    ``(v - v_+) (v - c (1 - (v_+/v)^g) / (1 - v_+/v))`` with
    ``c = (1 - v_+) / (1 - v_+^g)`` is used; near 1 the direct form with
    ``expm1``.  Both endstates evaluate to exactly zero.
    """
    v = np.asarray(vhat, dtype=float)
    g, vp, a = params.gamma, params.v_plus, params.a
    out = np.empty_like(v)
    near_plus = (v - vp) <= (1.0 - v)

    w = v[near_plus]
    dev = w - vp
    c = (1.0 - vp) / _one_minus_pow(vp, g) if g != 1.0 else 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = dev / w  # 1 - v_+/v
        q = np.where(
            dev > 0.0,
            -np.expm1(g * np.log1p(-rel)) / np.where(rel > 0, rel, 1.0),
            g,
        )
    out[near_plus] = dev * (w - c * q)

    w = v[~near_plus]
    out[~near_plus] = w * ((w - 1.0) + a * np.expm1(-g * np.log(w)))
    return out if out.ndim else float(out)


def coefficient_functions(vhat, params: ShockParams, check: bool = True):
    """Return ``(H_rhs, h, cap_H, f)`` at ``vhat``.

    ``H_rhs`` is the profile right-hand side, ``h`` the pressure-derivative
    weight, ``cap_H = h v^-g`` and ``f = v - cap_H`` the (3,3) coefficient of
    the eigenvalue system.
    """
    v = _check_range(vhat, params) if check else np.asarray(vhat, dtype=float)
    g, a = params.gamma, params.a
    vg = v**g
    h = -v ** (g + 1.0) + a * (g - 1.0) + (a + 1.0) * vg
    cap_h = -v + a * (g - 1.0) / vg + (a + 1.0)
    f = v - cap_h
    return profile_rhs(v, params), h, cap_h, f


def profile_rhs_derivative(vhat, params: ShockParams):
    """d H_rhs / dv, used for Hermite second derivatives and decay rates."""
    v = np.asarray(vhat, dtype=float)
    g, a = params.gamma, params.a
    return 2.0 * v - 1.0 - a + a * (1.0 - g) * v ** (-g)


# ---------------------------------------------------------------------------
# profile


@dataclass(frozen=True)
class ShockProfile:
    """Dense cubic-Hermite representation of the profile on a uniform mesh.

    Node derivatives are exactly ``H_rhs`` of the node values.  Outside the
    mesh the profile is continued by the endstate nodes.
    """

    params: ShockParams
    x: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    center_value: float
    clamped: bool = False

    @property
    def x_min(self) -> float:
        return float(self.x[0])

    @property
    def x_max(self) -> float:
        return float(self.x[-1])

    @property
    def half_length(self) -> float:
        return min(-self.x_min, self.x_max)

    @property
    def spacing(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def centered_strong(self) -> bool:
        vp = self.params.v_plus
        return vp <= STRONG_CENTER_OFFSET and self.center_value == vp + STRONG_CENTER_OFFSET

    def __call__(self, xq, nu: int = 0):
        """Evaluate the interpolant (``nu=0``) or its derivative (``nu=1``)."""
        xq = np.asarray(xq, dtype=float)
        h = self.spacing
        n = len(self.x)
        s = (xq - self.x[0]) / h
        i = np.clip(np.floor(s).astype(np.int64), 0, n - 2)
        t = np.clip(s - i, 0.0, 1.0)
        v0, v1 = self.v[i], self.v[i + 1]
        d0, d1 = self.dv[i] * h, self.dv[i + 1] * h
        if nu == 0:
            t2 = t * t
            t3 = t2 * t
            out = (
                (2 * t3 - 3 * t2 + 1) * v0
                + (t3 - 2 * t2 + t) * d0
                + (-2 * t3 + 3 * t2) * v1
                + (t3 - t2) * d1
            )
        elif nu == 1:
            t2 = t * t
            out = (
                (6 * t2 - 6 * t) * v0
                + (3 * t2 - 4 * t + 1) * d0
                + (-6 * t2 + 6 * t) * v1
                + (3 * t2 - 2 * t) * d1
            ) / h
            out = np.where((s < 0) | (s > n - 1), 0.0, out)
        else:
            raise ValueError("nu must be 0 or 1")
        return out if out.ndim else float(out)

    def kernel_data(self):
        """Flat arrays consumed by the compiled shooting kernel."""
        return (
            float(self.x[0]),
            self.spacing,
            np.ascontiguousarray(self.v, dtype=np.float64),
            np.ascontiguousarray(self.dv, dtype=np.float64),
        )

    def to_csv(self, path, header_comment: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header_comment:
                for line in header_comment.splitlines():
                    fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "vhat", "vhat_prime"])
            for xi, vi, di in zip(self.x, self.v, self.dv):
                w.writerow([f"{xi:.17g}", f"{vi:.17g}", f"{di:.17g}"])


def center_value(params: ShockParams, rule: str = "auto") -> float:
    """Phase condition ``vhat(0)``.

    ``"auto"``: ``v_+ + 1/12`` for strong shocks (``v_+ <= 1/12``), the
    midpoint otherwise.  ``"midpoint"``: always ``(1 + v_+)/2``.
    """
    if rule == "midpoint":
        return 0.5 * (1.0 + params.v_plus)
    if rule != "auto":
        raise ValueError("rule must be 'auto' or 'midpoint'")
    if params.v_plus <= STRONG_CENTER_OFFSET:
        return params.v_plus + STRONG_CENTER_OFFSET
    return 0.5 * (1.0 + params.v_plus)


def solve_profile(
    params: ShockParams,
    half_length: float,
    tol: float = 1e-10,
    spacing: float = 1e-3,
    endstate_tol: float | None = None,
    center: str = "auto",
) -> ShockProfile:
    """Integrate the profile ODE from ``x = 0`` out to ``x = +-half_length``.

    The scalar ODE is integrated with DOP853 at relative tolerance ``tol``
    and sampled on a uniform mesh of the given ``spacing``.  Values that
    overshoot the endstates are clamped into ``(v_+, 1)`` and the result is
    flagged.  With ``endstate_tol`` set, a profile that has not reached
    within that distance of both endstates raises :class:`ProfileError`.
    ``center`` selects the phase condition (see :func:`center_value`).
    """
    if half_length <= 0:
        raise ValueError("half_length must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    vp = params.v_plus
    v0 = center_value(params, center)
    n_half = max(int(math.ceil(half_length / spacing)), 2)
    h = half_length / n_half
    xs = h * np.arange(-n_half, n_half + 1)

    def rhs(_x, y):
        return [float(profile_rhs(y[0], params))]

    atol = tol * min(vp, 1.0 - vp) * 1e-3
    vals = np.empty_like(xs)
    vals[n_half] = v0
    for sign in (1.0, -1.0):
        sl = slice(n_half + 1, None) if sign > 0 else slice(n_half - 1, None, -1)
        t_eval = xs[sl]
        sol = solve_ivp(
            rhs, (0.0, sign * half_length), [v0], method="DOP853",
            rtol=tol, atol=atol, t_eval=t_eval,
        )
        if not sol.success:
            raise ProfileError(f"profile integration failed: {sol.message}")
        vals[sl] = sol.y[0]

    lo = np.nextafter(vp, 1.0)
    hi = np.nextafter(1.0, 0.0)
    clamped = bool(np.any(vals < lo) or np.any(vals > hi))
    vals = np.clip(vals, lo, hi)
    if np.any(np.diff(vals) > 0):
        clamped = True
        vals = np.minimum.accumulate(vals)

    if endstate_tol is not None:
        gap_minus = 1.0 - vals[0]
        gap_plus = vals[-1] - vp
        if gap_minus > endstate_tol or gap_plus > endstate_tol:
            from .evans import domain_length_for_tolerance

            need = domain_length_for_tolerance(params, endstate_tol)
            raise ProfileError(
                f"domain too short: endstate gaps ({gap_minus:.3g}, {gap_plus:.3g}) exceed "
                f"{endstate_tol:.3g}; need half_length >= {need:.3g}"
            )

    return ShockProfile(
        params=params,
        x=xs,
        v=vals,
        dv=np.asarray(profile_rhs(vals, params)),
        center_value=v0,
        clamped=clamped,
    )


# ---------------------------------------------------------------------------
# decay validation


@dataclass
class DecayReport:
    applicable: bool
    worst_margin: float
    worst_x: float
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


class ValidationError(RuntimeError):
    pass


def decay_envelopes(x):
    """Envelopes bounding ``|v - v_+|`` for ``x >= 0`` and ``|v - 1|`` for ``x <= 0``."""
    x = np.asarray(x, dtype=float)
    return np.where(
        x >= 0,
        STRONG_CENTER_OFFSET * np.exp(-0.75 * np.maximum(x, 0.0)),
        0.25 * np.exp((np.minimum(x, 0.0) + 12.0) / 2.0),
    )


def validate_profile_decay(
    profile: ShockProfile, n_samples: int = 2001, tol: float = 1e-6, raise_on_fail: bool = True
) -> DecayReport:
    """Check the exponential decay envelopes for a strongly centred profile.

    Margins are ``envelope - |deviation|``; a margin below ``-tol`` is a
    violation.
    """
    if not profile.centered_strong:
        return DecayReport(applicable=False, worst_margin=math.nan, worst_x=math.nan)
    xs = np.linspace(profile.x_min, profile.x_max, n_samples)
    if not np.any(xs == 0.0):
        xs = np.sort(np.append(xs, 0.0))
    v = profile(xs)
    dev = np.where(xs >= 0, np.abs(v - profile.params.v_plus), np.abs(v - 1.0))
    margin = decay_envelopes(xs) - dev
    k = int(np.argmin(margin))
    bad = xs[margin < -tol]
    report = DecayReport(
        applicable=True,
        worst_margin=float(margin[k]),
        worst_x=float(xs[k]),
        violations=[float(b) for b in bad],
    )
    if bad.size and raise_on_fail:
        raise ValidationError(f"decay bound violated at x = {bad[:10].tolist()}")
    return report
