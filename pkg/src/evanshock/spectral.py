"""Endstate eigenvalues, analytic eigenvectors and Kato projector transport.

Everything here is conjugation-free so that quantities stay analytic in the
spectral parameter; only seed normalization uses a modulus.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

_OMEGA = complex(-0.5, math.sqrt(3.0) / 2.0)


class SplittingError(RuntimeError):
    """Endstate eigenvalue counts differ from consistent splitting."""

    def __init__(self, lam, roots, where):
        self.lam = lam
        self.roots = list(roots)
        super().__init__(f"consistent splitting violated at {where}, lambda={lam!r}: roots={roots!r}")


class ConditioningWarning(UserWarning):
    pass


class KatoStepError(RuntimeError):
    pass


def cubic_roots(b, c, d, polish: int = 2):
    """Roots of ``z^3 + b z^2 + c z + d``.

    Cardano's formula (square-root branch maximizing ``|u^3|``) gives the
    largest-modulus root accurately; the other two come from the deflated
    quadratic via the cancellation-free formula.  Each root gets ``polish``
    Newton steps on the original cubic.
    """
    b, c, d = complex(b), complex(c), complex(d)
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = cmath.sqrt(q * q / 4.0 + p**3 / 27.0)
    u3 = -q / 2.0 + disc
    u3m = -q / 2.0 - disc
    if abs(u3m) > abs(u3):
        u3 = u3m
    if u3 == 0:
        cand = [-b / 3.0]
    else:
        u = u3 ** (1.0 / 3.0)
        cand = [u * _OMEGA**k - p / (3.0 * u * _OMEGA**k) - b / 3.0 for k in range(3)]
    z1 = max(cand, key=abs)
    if z1 == 0:
        roots = [0j, 0j, 0j]
    else:
        # z^3 + b z^2 + c z + d = (z - z1)(z^2 + p1 z + q1)
        # q1 = -d/z1 is exact; p1 has two forms, take the one with less cancellation
        q1 = -d / z1
        pa, pb = b + z1, (q1 - c) / z1
        ra = abs(pa) / max(abs(b), abs(z1))
        rb = abs(q1 - c) / max(abs(q1), abs(c), 1e-300)
        p1 = pa if ra >= rb else pb
        s = cmath.sqrt(p1 * p1 - 4.0 * q1)
        w = -0.5 * (p1 + s) if abs(p1 + s) >= abs(p1 - s) else -0.5 * (p1 - s)
        if w == 0:
            roots = [z1, 0j, 0j]
        else:
            roots = [z1, w, q1 / w]
    out = []
    for z in roots:
        for _ in range(polish):
            fz = ((z + b) * z + c) * z + d
            dfz = (3.0 * z + 2.0 * b) * z + c
            if dfz == 0:
                break
            z_new = z - fz / dfz
            if abs(((z_new + b) * z_new + c) * z_new + d) >= abs(fz):
                break
            z = z_new
        out.append(z)
    return out


def char_coeffs(lam, w, f):
    """Coefficients of ``det(mu I - A) = mu^3 + (lam - f) mu^2 - 2 lam w mu - lam^2 w``."""
    return lam - f, -2.0 * lam * w, -lam * lam * w


def evans_matrix(lam, w, f):
    lam = complex(lam)
    return np.array(
        [[0.0, lam, 1.0], [0.0, 0.0, 1.0], [lam * w, lam * w, f - lam]], dtype=complex
    )


def _null_from_rows(m):
    # largest bilinear cross product of two rows is orthogonal (no conj) to all rows
    best = None
    best_n = -1.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        cv = np.cross(m[i], m[j])
        n = np.linalg.norm(cv)
        if n > best_n:
            best, best_n = cv, n
    return best


def right_eigvec(mat, mu):
    return _null_from_rows(mat - mu * np.eye(3))


def left_eigvec(mat, mu):
    return _null_from_rows((mat - mu * np.eye(3)).T)


def projector(r, left):
    """Rank-one spectral projector ``r l^T / (l^T r)`` (bilinear), ``l = left``."""
    return np.outer(r, left) / (left @ r)


@dataclass(frozen=True)
class EndstateEigen:
    """Unstable eigenvalue of an endstate matrix and its spectral projector."""

    lam: complex
    mu: complex
    roots: tuple
    right: np.ndarray
    left: np.ndarray
    proj: np.ndarray


def _canonical(vec):
    # unit length, largest component real positive (deterministic seed phase)
    vec = np.asarray(vec, dtype=complex)
    k = int(np.argmax(np.abs(vec)))
    vec = vec * (abs(vec[k]) / vec[k])
    vec = vec / np.linalg.norm(vec)
    vec[k] = vec[k].real
    return vec


def unstable_eigen(lam, w, f, where: str, gap_tol: float = 1e-10) -> EndstateEigen:
    """The unique root with positive real part of the endstate cubic.

    Raises :class:`SplittingError` unless exactly one root has ``Re > 0``.
    """
    lam = complex(lam)
    roots = cubic_roots(*char_coeffs(lam, w, f))
    if lam.imag == 0.0:
        roots = [complex(z.real, 0.0) if abs(z.imag) <= 1e-12 * max(1.0, abs(z)) else z
                 for z in roots]
    roots.sort(key=lambda z: (-z.real, z.imag))
    n_pos = sum(1 for z in roots if z.real > 0)
    if n_pos != 1:
        raise SplittingError(lam, roots, where)
    mu = roots[0]
    gap = min(abs(mu - roots[1]), abs(mu - roots[2]), abs(roots[1] - roots[2]))
    if gap < gap_tol:
        warnings.warn(f"near-defective endstate eigenvalues at lambda={lam!r}", ConditioningWarning)
    mat = evans_matrix(lam, w, f)
    r = right_eigvec(mat, mu)
    l_ = left_eigvec(mat, mu)
    return EndstateEigen(lam, mu, tuple(roots), r, l_, projector(r, l_))


def stable_eigvecs(lam, w, f):
    """Right eigenvectors of the two roots with ``Re < 0`` (for biorthogonality checks)."""
    roots = sorted(cubic_roots(*char_coeffs(complex(lam), w, f)), key=lambda z: -z.real)
    mat = evans_matrix(lam, w, f)
    return [right_eigvec(mat, mu) for mu in roots[1:]]


# ---------------------------------------------------------------------------
# Kato transport


def kato_step(vec, p_old, p_new, side: str = "right", min_overlap: float = 0.1):
    """Transport ``vec`` from range(``p_old``) to range(``p_new``).

    Uses the pair-of-projections rotation, which for rank-one projectors
    reduces to ``P_new r / sqrt(tr(P_old P_new))``; it matches the Kato
    transport ODE to second order in the step.  For ``side="left"`` the row
    vector is transported by ``l P_new``.
    """
    moved = p_new @ vec if side == "right" else vec @ p_new
    if np.linalg.norm(moved) < min_overlap * np.linalg.norm(vec):
        raise KatoStepError("projector rotated too far in one step")
    kappa = np.trace(p_old @ p_new)
    return moved / cmath.sqrt(kappa)


def kato_continue(projectors, r0, side: str = "right"):
    """Kato-transport ``r0`` along a sequence of projectors; returns all iterates."""
    out = [np.asarray(r0, dtype=complex)]
    for p_old, p_new in zip(projectors[:-1], projectors[1:]):
        out.append(kato_step(out[-1], p_old, p_new, side))
    return out


@dataclass
class KatoState:
    """Both endstate eigen-data at a spectral point plus transported vectors."""

    lam: complex
    minus: EndstateEigen
    plus: EndstateEigen
    r_minus: np.ndarray
    l_plus: np.ndarray


class KatoTracker:
    """Analytic initial data for shooting, continued in ``lambda`` by Kato transport.

    Between requested points the path is subdivided so that every transport
    step has ``|d lambda| <= max_step``; this keeps the continuation close to
    the exact analytic one independently of the caller's mesh.
    """

    def __init__(self, w_minus, f_minus, w_plus, f_plus, max_step: float = 0.01):
        self.w_minus = w_minus
        self.f_minus = f_minus
        self.w_plus = w_plus
        self.f_plus = f_plus
        self.max_step = max_step

    def eigen(self, lam):
        return (
            unstable_eigen(lam, self.w_minus, self.f_minus, "minus infinity"),
            unstable_eigen(lam, self.w_plus, self.f_plus, "plus infinity"),
        )

    def seed(self, lam) -> KatoState:
        """Real seed with canonical unit eigenvectors (requires real ``lam``)."""
        lam = complex(lam)
        if lam.imag != 0.0:
            raise ValueError("Kato seed must be real for conjugate symmetry")
        m, p = self.eigen(lam)
        return KatoState(lam, m, p, _canonical(m.right), _canonical(p.left))

    def advance(self, state: KatoState, lam_new, path=None, depth: int = 0) -> KatoState:
        """Transport ``state`` to ``lam_new`` along ``path`` (straight line by default).

        ``path(t)`` for ``t`` in ``[0, 1]`` must start at ``state.lam``.
        """
        lam_new = complex(lam_new)
        if path is None:
            lam0 = state.lam

            def path(t):
                return lam0 + t * (lam_new - lam0)

        length = _path_length(path)
        n = max(1, int(math.ceil(length / self.max_step)))
        cur = state
        for k in range(1, n + 1):
            lam_k = lam_new if k == n else complex(path(k / n))
            try:
                cur = self._step(cur, lam_k)
            except KatoStepError:
                if depth > 12:
                    raise
                cur = self.advance(
                    cur, lam_k, lambda t, a=(k - 1) / n, b=k / n: path(a + t * (b - a)), depth + 1
                )
        return cur

    def _step(self, state: KatoState, lam) -> KatoState:
        m, p = self.eigen(lam)
        r = kato_step(state.r_minus, state.minus.proj, m.proj, "right")
        l_ = kato_step(state.l_plus, state.plus.proj, p.proj, "left")
        return KatoState(lam, m, p, r, l_)


def _path_length(path, samples: int = 64):
    pts = [complex(path(k / samples)) for k in range(samples + 1)]
    return sum(abs(b - a) for a, b in zip(pts[:-1], pts[1:]))
