"""Condition numbers of initial-value propagation y0 -> e^{tA} y0.

Exact quantities, for a unit perturbation direction z0 and the normalized
initial value y0_hat = y0 / ||y0||:

    directional   K(t) = ||e^{tA} z0|| / ||e^{tA} y0_hat||
    worst-case    K(t) = ||e^{tA}||    / ||e^{tA} y0_hat||

and their large-t asymptotic forms built from the rightmost eigenvalue
block: a constant oscillation scale factor OSF times a periodic
oscillating term OT (identically 1 when the rightmost eigenvalue is
real).  The finite-time gap between the two is controlled by the
dominance sums eps(t) and eps(t, u) over the subdominant blocks, which
yield a computable relative-precision bound.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import OdecondError, UnsupportedBlock, ZeroProjection
from .matrix_core import (
    as_real_matrix,
    induced_matrix_norm,
    mat_exp,
    vector_norm,
    _normalize_p,
)
from .minimax import h_envelope
from .oscillator import (
    VWPair,
    f_vw,
    f_vw_max,
    f_vw_min,
    g_factor,
    phase_offset,
    phase_x,
)
from .spectral import (
    EigenBlock,
    SpectrumAnalysis,
    analyze_spectrum,
    block_project,
)

__all__ = [
    "UNBOUNDED",
    "Scenario",
    "OscillationProfile",
    "ConditionSeries",
    "default_time_grid",
    "epsilon_bounds",
    "k_asym",
    "k_exact",
    "osf",
    "ot",
    "ot_envelope",
    "precision_bound",
    "sweep",
]

# Flag value for the precision bound where eps(t, y0_hat) >= 1.
UNBOUNDED = math.inf

# Projection-size policy for w_hat^(1) u against ||u||_2: at or below the
# error floor the asymptotic theory does not apply; inside the band the
# formulas are valid but OSF is legitimately huge, so the caller is warned.
_PROJECTION_ERROR = 1e-12
_PROJECTION_WARN = 1e-6

_SAMPLES_PER_PERIOD = 256

# V_mod / W_mod below this are the zero cases of the envelope formulas;
# matches the floor under which the spectral phase angles are pinned.
_MOD_FLOOR = 1e-13

_CSV_COLUMNS = ("t", "k_exact", "k_asym", "osf", "ot",
                "eps_t", "eps_tu", "precision_bound")


@dataclass(frozen=True)
class Scenario:
    """One conditioning problem: matrix, initial value, optional unit
    perturbation direction, norm selector and time grid.

    y0 may have any nonzero length; the condition numbers only see
    y0_hat = y0 / ||y0||_p.  z0, when given, must already be a unit
    vector in the same norm (it plays the role of a normalized
    perturbation direction, not of a free perturbation).
    """

    matrix: np.ndarray
    y0: np.ndarray
    t_grid: np.ndarray
    z0: Optional[np.ndarray] = None
    norm_p: object = 2

    def __post_init__(self):
        A = as_real_matrix(self.matrix, square=True)
        p = _normalize_p(self.norm_p)
        y0 = np.asarray(self.y0, dtype=float).reshape(-1)
        if y0.shape[0] != A.shape[0]:
            raise ValueError(
                f"y0 has length {y0.shape[0]}, matrix is {A.shape[0]}x{A.shape[0]}"
            )
        if not np.all(np.isfinite(y0)) or vector_norm(y0, p) == 0.0:
            raise ValueError("y0 must be finite and nonzero")
        z0 = self.z0
        if z0 is not None:
            z0 = np.asarray(z0, dtype=float).reshape(-1)
            if z0.shape != y0.shape:
                raise ValueError("z0 must have the same length as y0")
            if abs(vector_norm(z0, p) - 1.0) > 1e-12:
                raise ValueError(
                    f"z0 must be a unit vector in the {p}-norm "
                    f"(got ||z0|| = {vector_norm(z0, p):.17g})"
                )
        tg = np.asarray(self.t_grid, dtype=float).reshape(-1)
        if tg.size < 1 or not np.all(np.isfinite(tg)):
            raise ValueError("t_grid must be a nonempty finite sequence")
        if tg.size > 1 and not np.all(np.diff(tg) > 0):
            raise ValueError("t_grid must be strictly increasing")
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "norm_p", p)
        object.__setattr__(self, "t_grid", tg)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def y0_hat(self) -> np.ndarray:
        return self.y0 / vector_norm(self.y0, self.norm_p)

    @property
    def directional(self) -> bool:
        return self.z0 is not None


@dataclass(frozen=True)
class OscillationProfile:
    """Time-independent description of the asymptotic condition number.

    For a real rightmost eigenvalue the asymptotic condition number is the
    constant osf and every oscillation field is None.  For a complex
    rightmost pair, ot_min/ot_max are the extremes of the oscillating term
    over t for this particular scenario, while a_max >= a_minmax >=
    a_maxmin >= a_min are the universal envelopes over every admissible
    initial value (Euclidean norm only; None otherwise).
    """

    osf: float
    block_kind: str
    ot_min: float = 1.0
    ot_max: float = 1.0
    period: Optional[float] = None
    q1: Optional[float] = None
    a_max: Optional[float] = None
    a_minmax: Optional[float] = None
    a_maxmin: Optional[float] = None
    a_min: Optional[float] = None

    def __post_init__(self):
        if not (self.osf > 0.0):
            raise ValueError("osf must be positive")
        if self.block_kind not in ("real", "complex"):
            raise ValueError(f"unknown block_kind {self.block_kind!r}")
        if self.ot_min > self.ot_max * (1.0 + 1e-12):
            raise ValueError("ot_min exceeds ot_max")
        if self.period is not None and not (self.period > 0.0):
            raise ValueError("period must be positive")
        vals = (self.a_min, self.a_maxmin, self.a_minmax, self.a_max)
        if all(v is not None for v in vals):
            lo, mid_lo, mid_hi, hi = vals
            slack = 1e-12 * max(1.0, hi)
            if not (lo <= mid_lo + slack and mid_lo <= mid_hi + slack
                    and mid_hi <= hi + slack):
                raise ValueError(
                    "universal envelopes must satisfy "
                    "a_min <= a_maxmin <= a_minmax <= a_max"
                )


def _norm_label(p) -> object:
    return "inf" if p == np.inf else int(p)


def _finite_or_none(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


@dataclass(frozen=True)
class ConditionSeries:
    """Per-sample results of a sweep plus the scenario-level profile.

    Arrays share the t grid.  precision_bound is UNBOUNDED (= inf) at
    samples where eps(t, y0_hat) >= 1; eps columns are NaN when some
    subdominant block is unsupported (the dominance sums need every block
    classified, the condition numbers themselves do not).
    """

    t: np.ndarray
    k_exact: np.ndarray
    k_asym: np.ndarray
    ot: np.ndarray
    eps_t: np.ndarray
    eps_tu: np.ndarray
    precision_bound: np.ndarray
    profile: OscillationProfile
    block_info: dict
    warnings: tuple = ()

    @property
    def osf(self) -> float:
        return self.profile.osf

    def rows(self):
        for i in range(self.t.shape[0]):
            yield (self.t[i], self.k_exact[i], self.k_asym[i], self.osf,
                   self.ot[i], self.eps_t[i], self.eps_tu[i],
                   self.precision_bound[i])

    def to_csv(self, stream) -> None:
        """Write the series as CSV with 17 significant digits per number."""
        stream.write(",".join(_CSV_COLUMNS) + "\n")
        for row in self.rows():
            stream.write(",".join(f"{v:.17g}" for v in row) + "\n")

    def summary_dict(self) -> dict:
        """JSON-ready summary: oscillation profile plus block metadata.

        Non-finite numbers (q1 = inf when W_1 = 0) become null so the
        output stays inside strict JSON.
        """
        prof = {k: _finite_or_none(v) if isinstance(v, float) else v
                for k, v in asdict(self.profile).items()}
        return {
            "profile": prof,
            "block": self.block_info,
            "warnings": list(self.warnings),
        }

    def to_json(self, stream) -> None:
        json.dump(self.summary_dict(), stream, indent=2, allow_nan=False)
        stream.write("\n")


def default_time_grid(block: EigenBlock, t_end: Optional[float] = None,
                      t_start: float = 0.0) -> np.ndarray:
    """Time grid at 256 samples per period of the rightmost oscillation.

    A real rightmost block has no period; the span is then covered by a
    flat 257 points and t_end is required.
    """
    if block.is_complex and block.omega != 0.0:
        period = math.pi / abs(block.omega)
        if t_end is None:
            t_end = t_start + 4.0 * period
        count = max(2, math.ceil((t_end - t_start) / period
                                 * _SAMPLES_PER_PERIOD) + 1)
    else:
        if t_end is None:
            raise ValueError("t_end is required for a real rightmost block")
        count = _SAMPLES_PER_PERIOD + 1
    if not t_end > t_start:
        raise ValueError("t_end must exceed t_start")
    return np.linspace(t_start, t_end, count)


def _abs_projection(block: EigenBlock, u) -> float:
    """|w_hat^(j) u| for a supported block of either kind."""
    return float(abs(np.asarray(block.w_hat) @ np.asarray(u, dtype=float)))


def _checked_projection(block: EigenBlock, u, label: str, notes=None) -> float:
    """|w_hat u| under the genericity policy.

    At or below 1e-12 * ||u||_2 the projection counts as zero and the
    asymptotic formulas are refused; inside (1e-12, 1e-6] they hold but
    blow up, which is recorded as a warning when a notes list is given.
    """
    scale = float(np.linalg.norm(u))
    wu = _abs_projection(block, u)
    if wu <= _PROJECTION_ERROR * scale:
        raise ZeroProjection(
            f"|w_hat {label}| = {wu:.3e} <= 1e-12 ||{label}||; "
            "the generic-case assumption fails"
        )
    if notes is not None and wu <= _PROJECTION_WARN * scale:
        notes.append(
            f"near-degenerate projection |w_hat {label}| = {wu:.3e}; "
            "asymptotic factors are large but valid"
        )
    return wu


def _rightmost(analysis: SpectrumAnalysis) -> EigenBlock:
    block = analysis.blocks[0]
    if not block.is_supported:
        raise UnsupportedBlock(
            "the rightmost eigenvalue group is not a simple real eigenvalue "
            "or a simple complex pair"
        )
    return block


def k_exact(s: Scenario, t: float) -> float:
    """Exact condition number at time t.

    Directional when the scenario carries z0, worst-case otherwise.  The
    worst case uses the induced matrix norm of e^{tA}, so it dominates
    every directional value and is >= 1.
    """
    E = mat_exp(s.matrix, t)
    denom = vector_norm(E @ s.y0_hat, s.norm_p)
    if s.directional:
        num = vector_norm(E @ s.z0, s.norm_p)
    else:
        num = induced_matrix_norm(E, s.norm_p)
    return num / denom


def k_asym(s: Scenario, analysis: SpectrumAnalysis, t: float) -> float:
    """Asymptotic condition number at time t from the rightmost block.

    Real rightmost eigenvalue: |w_hat z0| / |w_hat y0_hat| (directional)
    or 1 / |w_hat y0_hat| (worst case), constant in t.  Complex rightmost
    pair: the same scale factors times the ratio of oscillation factors
    g_1(t, z0) / g_1(t, y0_hat) or g_1(t) / g_1(t, y0_hat).
    """
    block = _rightmost(analysis)
    y0h = s.y0_hat
    wy = _checked_projection(block, y0h, "y0")
    if s.directional:
        wz = _checked_projection(block, s.z0, "z0")
        base = wz / wy
    else:
        base = 1.0 / wy
    if block.is_real:
        return base
    gy = g_factor(block, t, u=y0h, p=s.norm_p)
    gz = g_factor(block, t, u=s.z0 if s.directional else None, p=s.norm_p)
    return base * gz / gy


def osf(s: Scenario, block1: EigenBlock) -> float:
    """Oscillation scale factor of a complex rightmost block.

    directional: |w_hat z0| / |w_hat y0_hat|; worst case: 1 / |w_hat
    y0_hat|.  In the Euclidean norm the modulus is cross-checked against
    its expression in the coordinates of y0_hat along the right singular
    vectors of the stacked Re/Im rows of w_hat.
    """
    if not block1.is_complex:
        raise UnsupportedBlock("the oscillation scale factor needs a "
                               "complex rightmost block")
    y0h = s.y0_hat
    wy = _checked_projection(block1, y0h, "y0")
    if s.norm_p == 2 and block1.W_mod is not None:
        pr = block_project(block1, y0h)
        W = block1.W_mod
        recon = math.sqrt(((1.0 + W) * pr.c ** 2
                           + (1.0 - W) * pr.d ** 2) / 2.0)
        if abs(recon - wy) > 1e-8 * max(1.0, wy):
            raise OdecondError(
                f"projection modulus {wy:.17g} disagrees with its singular "
                f"coordinate form {recon:.17g}"
            )
    if s.directional:
        return _checked_projection(block1, s.z0, "z0") / wy
    return 1.0 / wy


def _euclidean_complex(s: Scenario, block1: EigenBlock):
    if not block1.is_complex:
        raise UnsupportedBlock("a complex rightmost block is required")
    if s.norm_p != 2 or block1.V_mod is None:
        raise UnsupportedBlock(
            "oscillating-term closed forms hold for the Euclidean norm only"
        )


def ot(s: Scenario, block1: EigenBlock, t: float) -> float:
    """Oscillating term at time t (Euclidean norm, complex block).

    Directional: sqrt(f_{V1 V1}(alpha, x)) at alpha = x_1(t) + Delta(y0)
    + pi and the t-independent x = 2 (gamma(z0) - gamma(y0)) - pi.  Worst
    case: sqrt((1 - W1^2)/2 * fmax(x_1(t)) / (1 + V1 cos(x_1(t) +
    Delta(y0)))).  Periodic in t with period pi / omega_1.
    """
    _euclidean_complex(s, block1)
    y0h = s.y0_hat
    _checked_projection(block1, y0h, "y0")
    x_t = phase_x(block1, t)
    d_y = phase_offset(block1, y0h)
    V, W = block1.V_mod, block1.W_mod
    if s.directional:
        _checked_projection(block1, s.z0, "z0")
        gy = block_project(block1, y0h).gamma
        gz = block_project(block1, s.z0).gamma
        pair = VWPair(V, V)
        alpha = x_t + d_y + math.pi
        x = 2.0 * (gz - gy) - math.pi
        return math.sqrt(f_vw(pair, alpha, x))
    pair = VWPair(V, W)
    num = (1.0 - W ** 2) / 2.0 * f_vw_max(pair, x_t)
    return math.sqrt(num / (1.0 + V * math.cos(x_t + d_y)))


def _worst_ot_extremes(V: float, W: float, beta: float):
    """Extremes over t of the worst-case oscillating term at a fixed
    initial-value phase beta = Delta(y0).  V = 0 and W = 0 shortcut the
    envelope machinery (which needs both strictly inside (0, 1))."""
    if V == 0.0:
        c = math.sqrt((1.0 + W) / 2.0)
        return c, c
    if W == 0.0:
        return (math.sqrt((1.0 + V) / (2.0 * (1.0 - V))),
                math.sqrt(0.5))
    env = h_envelope(VWPair(V, W), beta)
    scale = (1.0 - W ** 2) / 2.0
    return math.sqrt(scale * env.h_max), math.sqrt(scale * env.h_min)


def _q1_value(V: float, W: float) -> float:
    if V == 0.0:
        return 0.0
    if W == 0.0:
        return math.inf
    return (V / (2.0 * W)) * (1.0 + W)


def _universal_worst(V: float, W: float, q1: float):
    """Envelope values of the worst-case oscillating term over every
    admissible y0: largest maximum, smallest maximum, largest minimum and
    smallest minimum, in that order."""
    a_max = math.sqrt((1.0 + W) * (1.0 + V) / (2.0 * (1.0 - V)))
    if q1 <= 1.0:
        a_minmax = math.sqrt((1.0 + W) * (1.0 - V ** 2)
                             / (2.0 * (1.0 - q1 * V)))
    else:
        a_minmax = math.sqrt((1.0 - W) * (1.0 + V) / (2.0 * (1.0 - V)))
    a_maxmin = math.sqrt((1.0 + W) / 2.0)
    if V <= W:
        a_min = math.sqrt((1.0 + W) * (1.0 - V) / (2.0 * (1.0 + V)))
    else:
        a_min = math.sqrt((1.0 - W) / 2.0)
    return a_max, a_minmax, a_maxmin, a_min


def _universal_directional(V: float):
    a_max = math.sqrt((1.0 + V) / (1.0 - V))
    return a_max, 1.0, 1.0, 1.0 / a_max


def ot_envelope(s: Scenario, block1: EigenBlock) -> OscillationProfile:
    """Extremes of the oscillating term over t, plus universal envelopes.

    ot_min/ot_max are tight for this scenario: the directional term sweeps
    alpha through a full period of f_{V1 V1} at fixed x, the worst-case
    term sweeps x through a full period of the ratio envelope at fixed
    beta = Delta(y0).  The a_* fields bound ot_max (between a_minmax and
    a_max) and ot_min (between a_min and a_maxmin) over every admissible
    initial value.
    """
    _euclidean_complex(s, block1)
    y0h = s.y0_hat
    _checked_projection(block1, y0h, "y0")
    V = block1.V_mod if block1.V_mod > _MOD_FLOOR else 0.0
    W = block1.W_mod if block1.W_mod > _MOD_FLOOR else 0.0
    q1 = _q1_value(V, W)
    if s.directional:
        _checked_projection(block1, s.z0, "z0")
        gy = block_project(block1, y0h).gamma
        gz = block_project(block1, s.z0).gamma
        x = 2.0 * (gz - gy) - math.pi
        pair = VWPair(V, V)
        ot_max = math.sqrt(f_vw_max(pair, x))
        ot_min = math.sqrt(f_vw_min(pair, x))
        a_max, a_minmax, a_maxmin, a_min = _universal_directional(V)
    else:
        beta = phase_offset(block1, y0h)
        ot_max, ot_min = _worst_ot_extremes(V, W, beta)
        a_max, a_minmax, a_maxmin, a_min = _universal_worst(V, W, q1)
    return OscillationProfile(
        osf=osf(s, block1),
        block_kind="complex",
        ot_min=ot_min,
        ot_max=ot_max,
        period=math.pi / abs(block1.omega),
        q1=q1,
        a_max=a_max,
        a_minmax=a_minmax,
        a_maxmin=a_maxmin,
        a_min=a_min,
    )


def epsilon_bounds(analysis: SpectrumAnalysis, t: float, u=None, p=None):
    """Dominance sum eps(t, u) (u given) or eps(t) (u omitted).

    Returns (eps, g_ratios) with one ratio G_j = g_j / g_1 per subdominant
    block.  Terms whose direction projects to zero on block j contribute
    nothing and report a zero ratio; a zero projection on block 1 is an
    error because the sum is normalized by it.
    """
    if not analysis.all_supported:
        raise UnsupportedBlock(
            "the dominance sums need every eigenvalue group classified as "
            "simple single real or complex"
        )
    if p is None:
        p = analysis.norm_p
    p = _normalize_p(p)
    blocks = analysis.blocks
    b1 = blocks[0]
    if u is not None:
        u = np.asarray(u, dtype=float)
        w1 = _checked_projection(b1, u, "u")
    g1 = g_factor(b1, t, u=u, p=p)
    eps = 0.0
    ratios = []
    for bj in blocks[1:]:
        coef = 1.0
        if u is not None:
            wj = _abs_projection(bj, u)
            if wj <= _PROJECTION_ERROR * float(np.linalg.norm(u)):
                ratios.append(0.0)
                continue
            coef = wj / w1
        gj = g_factor(bj, t, u=u, p=p)
        ratio = gj / g1
        ratios.append(ratio)
        eps += math.exp((bj.r - b1.r) * t) * (bj.f / b1.f) * coef * ratio
    return eps, ratios


def precision_bound(eps_t, eps_tu):
    """Relative precision of k_asym as a stand-in for k_exact:
    (eps(t) + eps(t, y0_hat)) / (1 - eps(t, y0_hat)), or UNBOUNDED where
    eps(t, y0_hat) >= 1.  Accepts scalars or arrays."""
    et = np.asarray(eps_t, dtype=float)
    eu = np.asarray(eps_tu, dtype=float)
    valid = eu < 1.0
    denom = np.where(valid, 1.0 - eu, 1.0)
    out = np.where(valid, (et + eu) / denom, UNBOUNDED)
    return float(out) if out.ndim == 0 else out


def _worker_count() -> int:
    raw = os.environ.get("ODECOND_THREADS", "").strip()
    if raw:
        count = int(raw)
        if count < 1:
            raise ValueError("ODECOND_THREADS must be a positive integer")
        return count
    return min(8, os.cpu_count() or 1)


def _profile_for(s: Scenario, analysis: SpectrumAnalysis,
                 block: EigenBlock) -> OscillationProfile:
    if block.is_real:
        wy = _checked_projection(block, s.y0_hat, "y0")
        if s.directional:
            base = _checked_projection(block, s.z0, "z0") / wy
        else:
            base = 1.0 / wy
        return OscillationProfile(osf=base, block_kind="real")
    if s.norm_p == 2:
        return ot_envelope(s, block)
    # p in {1, inf}: the scale/oscillation split still holds but the
    # closed-form envelopes do not; report the factor and leave the
    # envelope fields unset, with ot extremes from the asymptotic series
    # left to the caller's grid.
    return OscillationProfile(
        osf=osf(s, block),
        block_kind="complex",
        period=math.pi / abs(block.omega),
    )


def _block_info(analysis: SpectrumAnalysis, block: EigenBlock) -> dict:
    info = {
        "kind": block.kind.value,
        "rightmost_real_part": block.r,
        "rightmost_frequency": block.omega,
        "non_normality_factor": block.f,
        "V": block.V_mod,
        "W": block.W_mod,
        "block_count": analysis.q,
        "all_blocks_supported": analysis.all_supported,
        "norm": _norm_label(analysis.norm_p),
    }
    return {k: _finite_or_none(v) if isinstance(v, float) else v
            for k, v in info.items()}


def sweep(s: Scenario, analysis: Optional[SpectrumAnalysis] = None
          ) -> ConditionSeries:
    """Evaluate the exact and asymptotic condition numbers over the grid.

    Samples may be computed in parallel (ODECOND_THREADS caps the pool);
    the output is assembled in grid order either way.  When a subdominant
    block is unsupported, the eps columns are NaN, the precision bound is
    UNBOUNDED and a warning is recorded; the condition numbers themselves
    only need the rightmost block.
    """
    if analysis is None:
        analysis = analyze_spectrum(s.matrix, norm_p=s.norm_p)
    block = _rightmost(analysis)
    notes = []
    y0h = s.y0_hat
    _checked_projection(block, y0h, "y0", notes)
    if s.directional:
        _checked_projection(block, s.z0, "z0", notes)
    profile = _profile_for(s, analysis, block)
    eps_ok = analysis.all_supported
    if not eps_ok:
        notes.append(
            "a subdominant eigenvalue group is unsupported; dominance "
            "bounds unavailable"
        )

    def sample(t: float):
        ke = k_exact(s, t)
        ka = k_asym(s, analysis, t)
        if eps_ok:
            et, _ = epsilon_bounds(analysis, t, p=s.norm_p)
            eu, _ = epsilon_bounds(analysis, t, u=y0h, p=s.norm_p)
        else:
            et = eu = math.nan
        return ke, ka, et, eu

    grid = s.t_grid
    workers = _worker_count()
    if workers > 1 and grid.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(sample, grid))
    else:
        results = [sample(t) for t in grid]
    ke, ka, et, eu = (np.array(col, dtype=float) for col in zip(*results))
    bound = precision_bound(et, eu) if eps_ok \
        else np.full(grid.shape, UNBOUNDED)
    ot_vals = ka / profile.osf
    return ConditionSeries(
        t=grid,
        k_exact=ke,
        k_asym=ka,
        ot=ot_vals,
        eps_t=et,
        eps_tu=eu,
        precision_bound=np.asarray(bound, dtype=float),
        profile=profile,
        block_info=_block_info(analysis, block),
        warnings=tuple(notes),
    )
