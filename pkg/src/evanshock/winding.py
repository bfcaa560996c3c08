"""Contours, argument-principle winding counts, real-axis scans and sweeps."""
from __future__ import annotations

import cmath
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import hf_bound, sharp_condition
from .evans import EvansError, EvansSystem, choose_lengths
from .model import ShockParams, solve_profile
from .spectral import SplittingError

ARG_STEP_MAX = math.pi / 25
MAX_DEPTH = 12
NEAR_ZERO = 1e-12


class ContourError(RuntimeError):
    def __init__(self, message, segment=None):
        super().__init__(message)
        self.segment = segment


class SymmetryWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# contour


@dataclass(frozen=True)
class Contour:
    """Closed counterclockwise semicircle ``|lam| = R``, ``Re lam >= 0``, indented at 0.

    The loop is parametrized by ``t`` in ``[0, 1]``: ``t = 0`` and ``t = 1``
    are the real point ``R``; the upper half (``t <= 1/2``) runs along the
    arc to ``iR``, down the imaginary axis to ``i r0`` and around the
    indentation to ``r0``; the lower half is its mirror image.
    """

    radius: float
    indentation_radius: float
    t: np.ndarray

    def _upper(self, u: float) -> complex:
        # u in [0, 1] along the upper half by arc length
        R, r0 = self.radius, self.indentation_radius
        l1, l2, l3 = 0.5 * math.pi * R, R - r0, 0.5 * math.pi * r0
        s = u * (l1 + l2 + l3)
        if s <= l1:
            return R * cmath.exp(1j * s / R)
        s -= l1
        if s <= l2:
            return complex(0.0, R - s)
        s -= l2
        return r0 * cmath.exp(1j * (0.5 * math.pi - s / r0))

    def point(self, t: float) -> complex:
        t = float(t)
        if t <= 0.5:
            z = self._upper(2.0 * t)
            return complex(z.real, max(z.imag, 0.0))
        return self.point(1.0 - t).conjugate()

    def path(self, t_a: float, t_b: float):
        return lambda s: self.point(t_a + s * (t_b - t_a))

    @property
    def points(self) -> np.ndarray:
        pts = np.array([self.point(t) for t in self.t])
        pts[-1] = pts[0]
        return pts

    @property
    def n_segments(self) -> int:
        return len(self.t) - 1


def build_contour(gamma: float, n_points: int = 60, safety: float = 1.1, r0: float = 1e-4) -> Contour:
    """Indented semicircle of radius ``safety * hf_bound(gamma)`` with ``n_points`` segments.

    Segments have roughly uniform arc length; each of the three pieces of
    the upper half (outer arc, imaginary axis, indentation) gets at least one.
    """
    if n_points < 16:
        raise ValueError("n_points must be >= 16")
    if safety < 1.0:
        raise ValueError("safety must be >= 1")
    if not (0.0 < r0 < 1.0):
        raise ValueError("r0 must lie in (0, 1)")
    R = safety * hf_bound(gamma)
    half = n_points // 2 + (n_points % 2)
    lengths = np.array([0.5 * math.pi * R, R - r0, 0.5 * math.pi * r0])
    total = lengths.sum()
    counts = np.maximum(1, np.floor(half * lengths / total).astype(int))
    while counts.sum() < half:
        counts[int(np.argmax(lengths / counts))] += 1
    while counts.sum() > half:
        counts[int(np.argmax(counts))] -= 1
    u = [0.0]
    start = 0.0
    for n, ln in zip(counts, lengths):
        for k in range(1, n + 1):
            u.append((start + ln * k / n) / total)
        start += ln
    u = np.array(u)
    u[-1] = 1.0
    t_upper = 0.5 * u
    t = np.concatenate([t_upper, 1.0 - t_upper[-2::-1]])
    return Contour(R, r0, t)


# ---------------------------------------------------------------------------
# winding


@dataclass
class WindingResult:
    values: list
    arg_steps: np.ndarray
    winding: int
    refinements: int

    @property
    def total_turns(self) -> float:
        return float(np.sum(self.arg_steps) / (2 * math.pi))


def arg_increments(values) -> np.ndarray:
    z = np.asarray(values, dtype=complex)
    return np.angle(z[1:] / z[:-1])


def _check_nonzero(values):
    mags = np.abs(np.asarray(values, dtype=complex))
    if np.any(mags < NEAR_ZERO):
        k = int(np.argmin(mags))
        raise ContourError(
            f"near-zero on contour at node {k} (|D| = {mags[k]:.3g}); change r0 or safety", k
        )


def refine_chain(values, refine=None, max_step=ARG_STEP_MAX, max_depth=MAX_DEPTH):
    """Bisect segments until every phase increment is below ``max_step``.

    ``refine(i)`` must return the value at the midpoint of segment ``i``
    (between ``values[i]`` and ``values[i+1]``) and record the insertion on
    its side.  Returns ``(values, n_inserted)``.
    """
    values = list(values)
    _check_nonzero(values)
    depth = [0] * (len(values) - 1)
    inserted = 0
    if refine is None:
        return values, 0
    i = 0
    while i < len(values) - 1:
        step = abs(cmath.phase(values[i + 1] / values[i]))
        if step < max_step:
            i += 1
            continue
        if depth[i] >= max_depth:
            raise ContourError(
                f"refinement depth {max_depth} exceeded on segment {i} (|darg| = {step:.3g})", i
            )
        mid = complex(refine(i))
        if abs(mid) < NEAR_ZERO:
            raise ContourError(f"near-zero on contour inside segment {i}; change r0 or safety", i)
        values.insert(i + 1, mid)
        d = depth[i] + 1
        depth[i:i + 1] = [d, d]
        inserted += 1
    return values, inserted


def winding_number(values, refine=None, max_step=ARG_STEP_MAX, max_depth=MAX_DEPTH) -> WindingResult:
    """Winding of a closed sequence (first value equals last) about the origin.

    With ``refine`` given, segments whose phase increment reaches
    ``max_step`` are bisected first (see :func:`refine_chain`).
    """
    values, inserted = refine_chain(values, refine, max_step, max_depth)
    steps = arg_increments(values)
    total = steps.sum() / (2 * math.pi)
    w = int(round(total))
    return WindingResult(values, steps, w, inserted)


# ---------------------------------------------------------------------------
# contour pipeline


@dataclass
class ContourReport:
    contour: Contour
    lambdas: np.ndarray
    D_values: np.ndarray
    arg_steps: np.ndarray
    winding: int
    refinements: int
    symmetric: bool
    warnings: list = field(default_factory=list)

    @property
    def stable(self) -> bool:
        return self.winding == 0

    @property
    def max_arg_step(self) -> float:
        return float(np.max(np.abs(self.arg_steps)))

    def to_dict(self) -> dict:
        return {
            "radius": self.contour.radius,
            "indentation_radius": self.contour.indentation_radius,
            "n_base_points": self.contour.n_segments,
            "n_evaluated": int(len(self.lambdas) - 1),
            "winding": self.winding,
            "refinements": self.refinements,
            "max_arg_step": self.max_arg_step,
            "total_turns": float(np.sum(self.arg_steps) / (2 * math.pi)),
            "stable": self.stable,
            "symmetric": self.symmetric,
            "warnings": list(self.warnings),
        }


class _Chain:
    """Kato chain along contour parameters, supporting midpoint insertion."""

    def __init__(self, system: EvansSystem, contour: Contour, ts):
        self.system = system
        self.contour = contour
        self.tracker = system.tracker()
        self.ts = [float(t) for t in ts]
        self.states = [self.tracker.seed(contour.point(self.ts[0]).real)]
        self.notes = []
        for ta, tb in zip(self.ts[:-1], self.ts[1:]):
            self.states.append(self._move(self.states[-1], ta, tb))
        self.values = [self._shoot(s) for s in self.states]

    def _move(self, state, ta, tb):
        return self.tracker.advance(state, self.contour.point(tb), path=self.contour.path(ta, tb))

    def _shoot(self, state):
        ev = self.system.shoot(state)
        self.notes.extend(ev.warnings)
        return ev.D

    def refine(self, i):
        ta, tb = self.ts[i], self.ts[i + 1]
        tm = 0.5 * (ta + tb)
        st = self._move(self.states[i], ta, tm)
        self.ts.insert(i + 1, tm)
        self.states.insert(i + 1, st)
        d = self._shoot(st)
        self.values.insert(i + 1, d)
        return d


def evaluate_contour(
    system: EvansSystem,
    contour: Contour,
    symmetric: bool = True,
    max_step: float = ARG_STEP_MAX,
    max_depth: int = MAX_DEPTH,
) -> ContourReport:
    """Evans function around ``contour`` with adaptive bisection and winding count.

    With ``symmetric=True`` only the upper half is computed (one Kato chain
    seeded at ``R``) and the lower half follows from ``D(conj lam) = conj D(lam)``.
    Otherwise a single chain runs around the whole loop.
    """
    ts = contour.t
    if symmetric:
        half = len(ts) // 2 + 1
        chain = _Chain(system, contour, ts[:half])
        refine_chain(chain.values, chain.refine, max_step, max_depth)
        up_l = np.array([contour.point(t) for t in chain.ts])
        up_d = np.array(chain.values)
        lambdas = np.concatenate([up_l, np.conj(up_l[-2::-1])])
        D = np.concatenate([up_d, np.conj(up_d[-2::-1])])
        lambdas[-1] = lambdas[0]
        D[-1] = D[0]
        refinements = 2 * (len(chain.ts) - half)
    else:
        chain = _Chain(system, contour, ts)
        refine_chain(chain.values, chain.refine, max_step, max_depth)
        lambdas = np.array([contour.point(t) for t in chain.ts])
        D = np.array(chain.values)
        refinements = len(chain.ts) - len(ts)
    notes = sorted(set(chain.notes))
    steps = arg_increments(D)
    if np.max(np.abs(steps)) >= max_step:
        raise ContourError("phase increment at the symmetry junction exceeds the threshold")
    total = steps.sum() / (2 * math.pi)
    w = int(round(total))
    if abs(total - w) >= 0.05:
        notes.append(f"winding sum {total:.4f} is not close to an integer")
    if not symmetric:
        closure = abs(D[-1] - D[0]) / abs(D[0])
        if closure > 1e-6:
            notes.append(f"Kato monodromy mismatch {closure:.3g} at the closing point")
    return ContourReport(contour, lambdas, D, steps, w, refinements, symmetric, notes)


def real_axis_scan(system: EvansSystem, n_samples: int = 200, r0: float = 1e-4):
    """``D`` at real ``lam`` in ``(r0, hf_bound]``, continued from the right end.

    Returns a dict with the samples, number of sign changes of ``Re D`` and
    the largest ``|Im D| / |D|``.
    """
    if n_samples < 50:
        raise ValueError("n_samples must be >= 50")
    top = hf_bound(system.params.gamma)
    lams = np.linspace(top, r0, n_samples + 1)[:-1]
    tracker = system.tracker()
    state = tracker.seed(lams[0])
    D = []
    for k, lam in enumerate(lams):
        if k:
            state = tracker.advance(state, lam)
        D.append(system.shoot(state).D)
    D = np.array(D)[::-1]
    lams = lams[::-1]
    re = D.real
    changes = int(np.count_nonzero(np.sign(re[1:]) != np.sign(re[:-1])))
    residue = float(np.max(np.abs(D.imag) / np.abs(D)))
    if residue > 1e-6:
        warnings.warn(f"real-axis symmetry residue {residue:.3g}", SymmetryWarning)
    return {
        "lambda": lams,
        "D": D,
        "sign_changes": changes,
        "imag_residue": residue,
        "min_abs_D": float(np.min(np.abs(D))),
    }


# ---------------------------------------------------------------------------
# pipeline and sweep


@dataclass(frozen=True)
class PipelineConfig:
    n_points: int = 60
    safety: float = 1.1
    r0: float = 1e-4
    theta: float = 1e-3
    L: float | None = None
    L_cap: float = 18.0
    atol: float = 1e-6
    rtol: float = 1e-8
    symmetric: bool = True


def contour_pipeline(params: ShockParams, cfg: PipelineConfig = PipelineConfig()):
    """Profile, Evans system and contour report for one shock."""
    if cfg.L is not None:
        Lm = Lp = float(cfg.L)
    else:
        Lm, Lp = choose_lengths(params, cfg.theta, cap=cfg.L_cap)
    prof = solve_profile(params, max(Lm, Lp))
    system = EvansSystem(prof, Lm, Lp, atol=cfg.atol, rtol=cfg.rtol)
    contour = build_contour(params.gamma, cfg.n_points, cfg.safety, cfg.r0)
    return system, evaluate_contour(system, contour, symmetric=cfg.symmetric)


def mach_grid(mach_min: float, mach_max: float, n_mach: int, log_scale: bool = True):
    if not (1.01 <= mach_min <= mach_max <= 1e4):
        raise ValueError("Mach range must lie within [1.01, 1e4]")
    if n_mach == 1:
        return np.array([mach_min])
    if log_scale:
        return np.geomspace(mach_min, mach_max, n_mach)
    return np.linspace(mach_min, mach_max, n_mach)


SWEEP_FIELDS = (
    "gamma", "mach", "v_plus", "L_minus", "L_plus", "winding", "refinements",
    "max_arg_step", "status", "message",
)


def sweep_point(gamma: float, mach_number: float, cfg: PipelineConfig, analytic_shortcut: bool = False):
    """One sweep row; numerical failures are recorded, not raised."""
    row = dict.fromkeys(SWEEP_FIELDS)
    row.update(gamma=float(gamma), mach=float(mach_number), message="")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            params = ShockParams.from_mach(gamma, mach_number)
        row["v_plus"] = params.v_plus
        if analytic_shortcut and sharp_condition(params).holds:
            row.update(winding=0, refinements=0, max_arg_step=0.0, status="analytic")
            return row
        system, rep = contour_pipeline(params, cfg)
        row.update(
            L_minus=system.L_minus, L_plus=system.L_plus, winding=rep.winding,
            refinements=rep.refinements, max_arg_step=rep.max_arg_step, status="ok",
            message="; ".join(rep.warnings),
        )
    except (ContourError, EvansError, SplittingError, RuntimeError, ValueError) as exc:
        row.update(status="error", message=f"{type(exc).__name__}: {exc}")
    return row


def _sweep_star(args):
    return sweep_point(*args)


def sweep(gamma_list, mach_list, cfg: PipelineConfig = PipelineConfig(), jobs: int = 1,
          analytic_shortcut: bool = False):
    """Winding table over ``gamma_list x mach_list`` in deterministic (gamma, M) order."""
    tasks = [(float(g), float(m), cfg, analytic_shortcut) for g in gamma_list for m in mach_list]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_star, tasks))
    else:
        rows = [_sweep_star(t) for t in tasks]
    return rows


def sweep_status(rows) -> int:
    """0 if every winding is zero, 2 if any is nonzero, 3 on any numerical failure."""
    if any(r["status"] == "error" for r in rows):
        return 3
    if any(r["winding"] != 0 for r in rows):
        return 2
    return 0
