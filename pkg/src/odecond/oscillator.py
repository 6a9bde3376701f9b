"""The oscillation kernel f and the Theta norms of a complex block.

Central object: for V, W in [0, 1),

    f(alpha, x) = (1 + V cos(x + alpha)) / (1 - W cos(alpha)).

For fixed x this oscillates monotonically in alpha between a closed-form
maximum and minimum.  The norms of the oscillation vector

    Theta(t, u) = (|v_k| cos(omega t + alpha_k + gamma(u)))_k

and the oscillation matrix

    Theta(t) = (|v_k| |w_l| cos(omega t + alpha_k + beta_l))_{k,l}

drive every time-dependent factor of the asymptotic condition numbers:
in the Euclidean norm they reduce to closed forms in the block moduli
V, W and the phase x(t) = 2 (omega t + theta) + delta.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConstant, UnsupportedBlock, ZeroProjection
from .matrix_core import _normalize_p, induced_matrix_norm
from .spectral import EigenBlock, block_project

__all__ = [
    "PhaseState",
    "VWPair",
    "alpha_extrema",
    "f_vw",
    "f_vw_max",
    "f_vw_min",
    "g_factor",
    "phase_offset",
    "phase_x",
    "theta_norm_mat",
    "theta_norm_p",
    "theta_norm_u",
    "wrap_angle",
]

#: |U| below this multiple of V + W switches to the continuity extension of
#: the extremizer angles (relevant only near V = W with x an odd multiple
#: of pi, where the closed form becomes 0/0).
_U_FLOOR_FACTOR = 1e-10


@dataclass(frozen=True)
class VWPair:
    """Moduli pair with both entries in [0, 1)."""

    V: float
    W: float

    def __post_init__(self):
        if not (0.0 <= self.V < 1.0 and 0.0 <= self.W < 1.0):
            raise ValueError(f"V and W must lie in [0, 1), got {self.V}, {self.W}")


@dataclass(frozen=True)
class PhaseState:
    """Argument x(t) and offset Delta(u) entering the Euclidean closed forms."""

    x: float
    delta_u: float


def wrap_angle(a):
    """Reduce an angle to (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    out = np.mod(-a + np.pi, 2.0 * np.pi)
    out = np.pi - out
    return out if out.ndim else float(out)


def f_vw(p: VWPair, alpha, x):
    """(1 + V cos(x + alpha)) / (1 - W cos(alpha)); accepts arrays."""
    alpha = np.asarray(alpha, dtype=float)
    val = (1.0 + p.V * np.cos(np.asarray(x, dtype=float) + alpha)) \
        / (1.0 - p.W * np.cos(alpha))
    return val if val.ndim else float(val)


def _u_polar(p: VWPair, x):
    U = p.V * np.exp(1j * np.asarray(x, dtype=float)) + p.W
    return np.abs(U), np.angle(U)


def stationary_curvature(p: VWPair, alpha, x):
    """Second derivative of f in alpha, valid at stationary points only:
    |U| (-cos(theta_U + alpha)) / (1 - W cos alpha)^2."""
    absU, thU = _u_polar(p, x)
    val = absU * (-np.cos(thU + np.asarray(alpha, dtype=float))) \
        / (1.0 - p.W * np.cos(alpha)) ** 2
    return val if val.ndim else float(val)


def _alpha_extrema_arrays(p: VWPair, x):
    """Vectorized extremizer angles; degenerate entries take their
    continuity limits instead of raising."""
    x = np.asarray(x, dtype=float)
    absU, thU = _u_polar(p, x)
    tiny = absU <= _U_FLOOR_FACTOR * (p.V + p.W)

    safe = np.where(tiny, 1.0, absU)
    s = np.clip(p.V * p.W * np.sin(x) / safe, -1.0, 1.0)
    a1 = np.arcsin(s) - thU
    a2 = np.pi - np.arcsin(s) - thU
    # classify by curvature sign, not by arcsin branch: the maximizer is the
    # candidate with negative second derivative (the two coincide when both
    # curvatures vanish, so the tie direction is irrelevant)
    c1 = stationary_curvature(p, a1, x)
    c2 = stationary_curvature(p, a2, x)
    amax = np.where(c1 <= c2, a1, a2)
    amin = np.where(c1 <= c2, a2, a1)

    if np.any(tiny):
        # near V = W with x near an odd multiple of pi; the limits follow
        # the principal branch after reducing x mod 2 pi
        x0 = wrap_angle(x)
        g = np.sin(x0 / 2.0)
        aE_max = np.arcsin(p.V * g) - x0 / 2.0
        aE_min = np.pi - np.arcsin(p.V * g) - x0 / 2.0
        amax = np.where(tiny, aE_max, amax)
        amin = np.where(tiny, aE_min, amin)
    return wrap_angle(amax), wrap_angle(amin)


def alpha_extrema(p: VWPair, x: float):
    """Angles where alpha -> f(alpha, x) attains its maximum and minimum,
    both reduced to (-pi, pi].

    When U(x) = V e^{ix} + W vanishes exactly the function is constant and
    there is nothing to extremize (DegenerateConstant); when |U| is merely
    negligible against V + W the continuity limits are returned.
    """
    if p.V + p.W == 0.0:
        raise DegenerateConstant("V = W = 0 makes f identically 1")
    absU, _ = _u_polar(p, x)
    if float(absU) == 0.0:
        raise DegenerateConstant(
            "U(x) = 0 exactly: f( . , x) is constant and has no extremizers"
        )
    amax, amin = _alpha_extrema_arrays(p, np.asarray(x, dtype=float))
    return float(amax), float(amin)


def f_vw_max(p: VWPair, x):
    """Maximum of f( . , x) over alpha; accepts array x.

    V = 0 or W = 0 short-circuits to the constant (1 + V) / (1 - W)."""
    x = np.asarray(x, dtype=float)
    if p.V == 0.0 or p.W == 0.0:
        val = np.full(x.shape, (1.0 + p.V) / (1.0 - p.W))
        return val if val.ndim else float(val)
    amax, _ = _alpha_extrema_arrays(p, x)
    val = f_vw(p, amax, x)
    return val if np.ndim(val) else float(val)


def f_vw_min(p: VWPair, x):
    """Minimum of f( . , x) over alpha; accepts array x."""
    x = np.asarray(x, dtype=float)
    if p.V == 0.0 or p.W == 0.0:
        val = np.full(x.shape, (1.0 - p.V) / (1.0 + p.W))
        return val if val.ndim else float(val)
    _, amin = _alpha_extrema_arrays(p, x)
    val = f_vw(p, amin, x)
    return val if np.ndim(val) else float(val)


# ------------------------------------------------------------------ blocks

def _require_euclidean(block: EigenBlock):
    if not block.is_complex:
        raise UnsupportedBlock("a complex block is required")
    if block.V_mod is None:
        raise UnsupportedBlock(
            "block carries no Euclidean data; analyze with norm_p=2"
        )


def phase_x(block: EigenBlock, t):
    """The oscillation argument x(t) = 2 (omega t + theta) + delta."""
    _require_euclidean(block)
    val = 2.0 * (block.omega * np.asarray(t, dtype=float) + block.theta_axis) \
        + block.delta
    return val if val.ndim else float(val)


def phase_offset(block: EigenBlock, u) -> float:
    """The phase offset Delta(u) = 2 (gamma(u) - theta)."""
    _require_euclidean(block)
    pr = block_project(block, u)
    return 2.0 * (pr.gamma - block.theta_axis)


def theta_norm_u(block: EigenBlock, t, u):
    """Euclidean norm of the oscillation vector Theta(t, u):
    sqrt((1 + V cos(x(t) + Delta(u))) / 2).  Accepts array t."""
    _require_euclidean(block)
    du = phase_offset(block, u)
    val = np.sqrt((1.0 + block.V_mod * np.cos(phase_x(block, t) + du)) / 2.0)
    return val if np.ndim(val) else float(val)


def theta_norm_mat(block: EigenBlock, t):
    """Euclidean induced norm of the oscillation matrix Theta(t):
    sqrt((1 - W^2) / 4 * fmax(x(t))).  Accepts array t."""
    _require_euclidean(block)
    pair = VWPair(block.V_mod, block.W_mod)
    val = np.sqrt((1.0 - block.W_mod ** 2) / 4.0
                  * f_vw_max(pair, phase_x(block, t)))
    return val if np.ndim(val) else float(val)


def theta_norm_p(block: EigenBlock, t: float, p, u=None):
    """Entrywise Theta norm for p in {1, inf}.

    Builds the oscillation vector (u given) or matrix (u omitted) from the
    component moduli and angles and returns the vector p-norm or induced
    matrix p-norm.  Both are at most 1 when the block was analyzed with the
    same p."""
    if not block.is_complex:
        raise UnsupportedBlock("a complex block is required")
    p = _normalize_p(p)
    if p == 2:
        raise ValueError("use theta_norm_u / theta_norm_mat for the 2-norm")
    mv, av = block.comp_moduli_v, block.comp_angles_v
    if u is None:
        mw, aw = block.comp_moduli_w, block.comp_angles_w
        Th = mv[:, None] * mw[None, :] * np.cos(
            block.omega * t + av[:, None] + aw[None, :])
        return induced_matrix_norm(Th, p)
    pr = block_project(block, u)
    vec = mv * np.cos(block.omega * t + av + pr.gamma)
    return float(np.linalg.norm(vec, p))


def g_factor(block: EigenBlock, t, u=None, p=None):
    """Oscillation factor g of a supported block.

    Real block: 1.  Complex block: twice the Theta norm, in vector form
    when a direction u is given and in matrix form otherwise.  p defaults
    to the norm the block was analyzed with."""
    if not block.is_supported:
        raise UnsupportedBlock("g_factor needs a supported block")
    if p is None:
        p = block.norm_p
    p = _normalize_p(p)
    if block.is_real:
        return 1.0
    if p == 2:
        if u is None:
            return 2.0 * theta_norm_mat(block, t)
        return 2.0 * theta_norm_u(block, t, u)
    return 2.0 * theta_norm_p(block, t, p, u)
