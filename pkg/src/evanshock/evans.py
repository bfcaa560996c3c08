"""Evans function of the integrated eigenvalue problem by adjoint shooting."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .bounds import hf_bound
from .model import ShockParams, ShockProfile, coefficient_functions, profile_rhs_derivative, solve_profile
from .spectral import KatoState, KatoTracker, evans_matrix, unstable_eigen

#: Integrator tolerances of the reference computation.
ATOL = 1e-6
RTOL = 1e-8

GAP_C1 = 1e4


class EvansError(RuntimeError):
    def __init__(self, message, lam=None, trace=None):
        super().__init__(message)
        self.lam = lam
        self.trace = trace


@dataclass(frozen=True)
class SplitEigen:
    """Growth rates and initial data at both ends.

    ``mu_minus`` is the unstable eigenvalue of ``A^-`` with right eigenvector
    ``v_minus``.  ``mu_tilde_plus = -mu_1^+`` is the decaying rate of the
    adjoint row system at ``+inf``; ``v_tilde_plus`` is the left eigenvector
    of ``A^+`` for its unstable eigenvalue ``mu_1^+``.
    """

    lam: complex
    mu_minus: complex
    v_minus: np.ndarray
    mu_tilde_plus: complex
    v_tilde_plus: np.ndarray
    roots_minus: tuple
    roots_plus: tuple

    @property
    def mu_plus_unstable(self) -> complex:
        return -self.mu_tilde_plus


@dataclass(frozen=True)
class EvansValue:
    lam: complex
    D: complex
    steps: int
    warnings: tuple = ()


@dataclass(frozen=True)
class EvansSystem:
    """Immutable bundle mapping ``lambda`` to ``D(lambda)``."""

    profile: ShockProfile
    L_minus: float
    L_plus: float
    atol: float = ATOL
    rtol: float = RTOL
    kato_max_step: float = 0.05
    _kernel: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.L_minus > -self.profile.x_min + 1e-12 or self.L_plus > self.profile.x_max + 1e-12:
            raise ValueError("profile does not span [-L_minus, L_plus]")
        object.__setattr__(self, "_kernel", self.profile.kernel_data())

    @classmethod
    def build(cls, params: ShockParams, L_minus: float, L_plus: float | None = None, **kw):
        L_plus = L_minus if L_plus is None else L_plus
        prof = solve_profile(params, max(L_minus, L_plus))
        return cls(prof, L_minus, L_plus, **kw)

    @property
    def params(self) -> ShockParams:
        return self.profile.params

    def endstate_coefficients(self):
        """``(w, f)`` at ``-inf`` (``v = 1``) and ``+inf`` (``v = v_+``)."""
        p = self.params
        f_minus = float(coefficient_functions(1.0, p)[3])
        f_plus = float(coefficient_functions(p.v_plus, p)[3])
        return (1.0, f_minus), (p.v_plus, f_plus)

    def tracker(self) -> KatoTracker:
        (wm, fm), (wp, fp) = self.endstate_coefficients()
        return KatoTracker(wm, fm, wp, fp, max_step=self.kato_max_step)

    # ------------------------------------------------------------------

    def build_A(self, x, lam):
        w = float(self.profile(x))
        f = float(coefficient_functions(w, self.params, check=False)[3])
        return evans_matrix(lam, w, f)

    def A_limit(self, lam, side: str):
        (wm, fm), (wp, fp) = self.endstate_coefficients()
        return evans_matrix(lam, wm, fm) if side == "minus" else evans_matrix(lam, wp, fp)

    def split_eigen(self, lam) -> SplitEigen:
        """Endstate eigen-data at a single point, with canonically normalized seed vectors.

        Phases here are per-point; use :meth:`contour_states` or
        :meth:`evaluate` for analytically continued initial data.
        """
        if complex(lam) == 0:
            raise EvansError("lambda = 0 is excluded", lam)
        st = self.tracker().seed(lam) if complex(lam).imag == 0 else self._arc_state(lam)
        return self._split_from_state(st)

    @staticmethod
    def _split_from_state(st: KatoState) -> SplitEigen:
        return SplitEigen(
            st.lam, st.minus.mu, st.r_minus, -st.plus.mu, st.l_plus,
            st.minus.roots, st.plus.roots,
        )

    def _arc_state(self, lam) -> KatoState:
        lam = complex(lam)
        rho = abs(lam)
        if rho == 0:
            raise EvansError("lambda = 0 is excluded", lam)
        theta = cmath.phase(lam)
        tr = self.tracker()
        st = tr.seed(rho)
        if theta == 0.0:
            return st
        return tr.advance(st, lam, path=lambda t: rho * cmath.exp(1j * theta * t))

    # ------------------------------------------------------------------

    def shoot(self, state: KatoState, x_match: float = 0.0) -> EvansValue:
        """Pair the forward and adjoint rescaled solutions at ``x_match``."""
        lam = state.lam
        mu_m = state.minus.mu
        mu_p = state.plus.mu
        x0, hp, v, dv = self._kernel
        p = self.params
        vmin = float(np.nextafter(p.v_plus, 1.0))
        notes = []
        try:
            yf, nf, _, lo_f, hi_f = backend.integrate(
                tuple(state.r_minus), -self.L_minus, x_match, lam, mu_m, backend.FORWARD,
                p.gamma, p.a, x0, hp, v, dv, vmin, self.atol, self.rtol,
            )
            ya, na, _, lo_a, hi_a = backend.integrate(
                tuple(state.l_plus), self.L_plus, x_match, lam, mu_p, backend.ADJOINT,
                p.gamma, p.a, x0, hp, v, dv, vmin, self.atol, self.rtol,
            )
        except backend.KernelError as exc:
            raise EvansError(f"integration failed at lambda={lam!r}: {exc}", lam, str(exc)) from exc
        n0f = float(np.linalg.norm(state.r_minus))
        n0a = float(np.linalg.norm(state.l_plus))
        if lo_f < 1e-3 * n0f or hi_f > 1e3 * n0f or lo_a < 1e-3 * n0a or hi_a > 1e3 * n0a:
            notes.append("stiffness: rescaled solution norm left [1e-3, 1e3] of its initial value")
        d = yf[0] * ya[0] + yf[1] * ya[1] + yf[2] * ya[2]
        if x_match != 0.0:
            d *= cmath.exp((mu_m - mu_p) * x_match)
        return EvansValue(lam, complex(d), nf + na, tuple(notes))

    def evaluate(self, lam, x_match: float = 0.0) -> EvansValue:
        """``D(lambda)`` with initial data continued along the arc ``|lambda| e^{i t}``.

        The seed is the real point ``|lambda|``, so ``D(conj lam) = conj D(lam)``.
        """
        return self.shoot(self._arc_state(lam), x_match)

    def __call__(self, lam) -> complex:
        return self.evaluate(lam).D


# ---------------------------------------------------------------------------
# domain length


@dataclass(frozen=True)
class DomainLength:
    theta: float
    L_minus: float
    L_plus: float
    L_minus_log10: float
    L_plus_log10: float
    L_plus_asymptotic: float
    L_plus_asymptotic_log10: float
    C1: float
    eta: float
    eta_hat: float
    decay_plus: float
    decay_minus: float
    note: str = (
        "semigroup rates eta=1/(2 gamma), eta_hat=1/(4 gamma) and coefficient decay rates "
        "3/4, 1/2 enter the Gap Lemma in roles that are not fully disambiguated; "
        "lengths follow the closed-form definitions"
    )

    def coefficient_bound(self, lam, params: ShockParams, side: str) -> float:
        """Prefactor of the exponential bound on ``|A(x) - A^{+-}|``."""
        g = params.gamma
        if side == "plus":
            return (2 * abs(lam) + 1 + g * g * (g - 1) / params.v_plus) / 12.0
        return (2 * abs(lam) + 1 + 2 * g**3 * (g - 1)) / 4.0

    def gap_bound(self, x, lam, params: ShockParams, eps: float = 0.5) -> float:
        """Relative initialization error bound at ``x >= L`` from the Gap Lemma."""
        c2 = self.coefficient_bound(lam, params, "plus")
        return self.C1 * c2 * math.exp(-self.decay_plus * x) / (
            (self.decay_plus - self.eta_hat) * (1 - eps)
        )

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def domain_length(theta: float, params: ShockParams) -> DomainLength:
    """Truncation lengths ``(L_-, L_+)`` for relative initialization error ``theta``.

    Natural logarithms are used.  Base-10 readings and the hypersonic
    asymptotic estimate for ``L_+`` are reported alongside.
    """
    if not (0.0 < theta < 1.0):
        raise ValueError("theta must lie in (0, 1)")
    g, vp = params.gamma, params.v_plus

    def lengths(log):
        lm = 2.0 * (abs(log(1e-4)) + abs(log(2 * g + 7 + 2 * g**3 * (g - 1))) + abs(log(theta))) + 12.0
        lp = (4.0 / 3.0) * (abs(log(1e-4)) + abs(log(2 * g + 7 + g * g * (g - 1) / vp)) + abs(log(theta)))
        asym = (4.0 / 3.0) * (2 * log(params.mach) + 4 + abs(log(1e-4)) + abs(log(theta)))
        return lm, lp, asym

    lm, lp, asym = lengths(math.log)
    lm10, lp10, asym10 = lengths(math.log10)
    return DomainLength(
        theta=theta, L_minus=lm, L_plus=lp, L_minus_log10=lm10, L_plus_log10=lp10,
        L_plus_asymptotic=asym, L_plus_asymptotic_log10=asym10,
        C1=GAP_C1, eta=1.0 / (2 * g), eta_hat=1.0 / (4 * g), decay_plus=0.75, decay_minus=0.5,
    )


def domain_length_for_tolerance(params: ShockParams, tol: float) -> float:
    """Half-length after which the profile is within ``tol`` of both endstates.

    Uses the linearized decay rates ``|H'(v_pm)|`` from the centering point.
    """
    from .model import center_value

    v0 = center_value(params)
    need = 0.0
    for end in (params.v_plus, 1.0):
        rate = abs(float(profile_rhs_derivative(end, params)))
        gap0 = abs(v0 - end)
        if gap0 > tol:
            need = max(need, math.log(gap0 / tol) / rate)
    return need


def choose_lengths(params: ShockParams, theta: float = 1e-3, cap: float = 18.0, floor: float = 8.0):
    """Practical ``(L_-, L_+)``: closed-form lengths clipped to ``[floor, cap]``."""
    dl = domain_length(theta, params)
    return (min(cap, max(floor, dl.L_minus)), min(cap, max(floor, dl.L_plus)))


# ---------------------------------------------------------------------------
# convergence in L


@dataclass
class RelativeErrorRow:
    L: float
    baseline_L: float
    max_rel_error: float


def relative_error_study(params: ShockParams, lambdas, L_list, center: str = "auto", **system_kw):
    """Max relative change of ``D`` on ``lambdas`` between consecutive ``L``.

    Each ``L`` uses the symmetric domain ``[-L, L]``; the baseline for ``L_k``
    is ``L_{k+1}``.  ``center`` is the profile phase condition.  Initial data
    are Kato-continued once along ``lambdas`` (in order, starting from a real
    point) and shared by every ``L``.
    """
    L_list = list(L_list)
    if any(b <= a for a, b in zip(L_list[:-1], L_list[1:])):
        raise ValueError("L_list must be strictly ascending")
    prof = solve_profile(params, max(L_list), center=center)
    systems = [EvansSystem(prof, L, L, **system_kw) for L in L_list]
    states = continue_states(systems[0].tracker(), lambdas)
    values = np.array([[s.shoot(st).D for st in states] for s in systems])
    rows = []
    for k in range(len(L_list) - 1):
        rel = np.abs(values[k] - values[k + 1]) / np.abs(values[k + 1])
        rows.append(RelativeErrorRow(L_list[k], L_list[k + 1], float(rel.max())))
    return rows, values


def continue_states(tracker: KatoTracker, lambdas, paths=None):
    """Kato states along ``lambdas``; the first point must be real."""
    lambdas = [complex(z) for z in lambdas]
    states = [tracker.seed(lambdas[0])]
    for k, lam in enumerate(lambdas[1:], start=1):
        path = paths[k - 1] if paths is not None else None
        states.append(tracker.advance(states[-1], lam, path=path))
    return states


def bound_check_A_decay(system: EvansSystem, lam, xs):
    """Ratio of ``|A(x) - A^+|_2`` to its exponential bound at each ``x >= 0``."""
    p = system.params
    aplus = system.A_limit(lam, "plus")
    pref = (2 * abs(lam) + 1 + p.gamma**2 * (p.gamma - 1) / p.v_plus) / 12.0
    out = []
    for x in xs:
        diff = np.linalg.norm(system.build_A(x, lam) - aplus, 2)
        out.append(diff / (pref * math.exp(-0.75 * x)))
    return np.array(out)


__all__ = [
    "ATOL",
    "RTOL",
    "DomainLength",
    "EvansError",
    "EvansSystem",
    "EvansValue",
    "SplitEigen",
    "choose_lengths",
    "continue_states",
    "domain_length",
    "hf_bound",
    "relative_error_study",
    "unstable_eigen",
]
