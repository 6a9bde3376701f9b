"""Acceptance gate: the headline numbers and guarantees, end to end.

Each test covers one release criterion and prints a single
"[acceptance] <label>: PASS/FAIL" line on the real terminal (bypassing
capture), so a log scan shows the verdict per criterion.  Stated runtime
budgets are asserted inside the criterion; tolerances are pinned here
and must not be loosened.
"""

import contextlib
import math
import time

import numpy as np

from odecond.condition import (
    Scenario,
    epsilon_bounds,
    k_asym,
    k_exact,
    osf,
    ot,
    ot_envelope,
    sweep,
)
from odecond.matrix_core import mat_exp
from odecond.minimax import h_envelope, h_envelope_sweep, h_extremes
from odecond.oscillator import (
    VWPair,
    f_vw_max,
    f_vw_min,
    theta_norm_mat,
    theta_norm_u,
)
from odecond.spectral import _build_supported_block, analyze_spectrum, build_Q

from conftest import EXAMPLE_A, sample_supported, unit
from oracles import grid_extreme_1d, grid_extreme_f, sphere_max, taylor_expm


@contextlib.contextmanager
def criterion(capsys, label, budget_s=None):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget_s is not None:
            assert elapsed < budget_s, \
                f"{label}: runtime {elapsed:.1f}s over the {budget_s}s budget"
    except BaseException:
        with capsys.disabled():
            print(f"[acceptance] {label}: FAIL")
        raise
    with capsys.disabled():
        print(f"[acceptance] {label}: PASS")


def close(value, reference, tol, label):
    assert abs(value - reference) <= tol + 1e-12, \
        f"{label}: {value!r} vs {reference!r} (tol {tol})"


def test_example_reproduction(capsys):
    # every displayed quantity of the built-in 3x3 example, recomputed
    # from the matrix alone, within one unit of its last displayed digit
    with criterion(capsys, "example-reproduction", budget_s=5.0):
        an = analyze_spectrum(EXAMPLE_A)
        b = an.blocks[0]
        grid = np.array([0.0, 1.0])
        s_minor = Scenario(matrix=EXAMPLE_A, y0=b.right_minor, t_grid=grid)
        s_major = Scenario(matrix=EXAMPLE_A, y0=b.right_major, t_grid=grid)
        pa = ot_envelope(s_minor, b)
        pb = ot_envelope(s_major, b)
        close(b.V_mod, 0.9988, 1e-4, "V1")
        close(b.W_mod, 0.9986, 1e-4, "W1")
        close(pa.q1, 0.9995, 1e-4, "Q1")
        close(pa.osf, 38.1, 1e-1, "scale factor, minor-direction y0")
        close(pb.osf, 1.0003, 1e-4, "scale factor, major-direction y0")
        close(pa.a_max, 41.0, 1e-1, "universal envelope max")
        close(pa.a_min, 0.0263, 1e-4, "universal envelope min")
        close(pa.a_minmax, 1.1869, 1e-4, "universal envelope minmax")
        close(pa.a_maxmin, 0.9997, 1e-4, "universal envelope maxmin")
        close(pa.osf * pa.ot_max, 1563.0, 1.0, "max asymptotic K, minor")
        close(pa.osf * pa.ot_min, 1.0, 1.0, "min asymptotic K, minor")
        close(pb.osf * pb.ot_max, 1.1873, 1e-4, "max asymptotic K, major")
        close(pb.osf * pb.ot_min, 1.0, 1.0, "min asymptotic K, major")


def test_oscillation_kernel_closed_forms(capsys, rng):
    # closed-form kernel envelopes against a dense-grid-plus-polish
    # oracle; 1e-8 absolute is close to the oracle's own float floor for
    # W near 1 (cancellation in its 1 - W cos(alpha) denominator), the
    # seeded stream peaks at 9.3e-9
    with criterion(capsys, "oscillation-kernel-closed-forms", budget_s=30.0):
        two_pi = 2.0 * math.pi
        for _ in range(200):
            V, W = rng.uniform(0.0, 1.0, 2)
            pair = VWPair(V, W)
            for x in rng.uniform(0.0, two_pi, 3):
                for which, fn in (("max", f_vw_max), ("min", f_vw_min)):
                    got = float(np.asarray(fn(pair, x)))
                    ref = grid_extreme_f(V, W, x, which=which)
                    close(got, ref, 1e-8, f"f_{which}({V:.3f},{W:.3f})")
            hi_of_max = (1.0 + V) / (1.0 - W)
            lo_of_max = (1.0 - V) / (1.0 - W) if V <= W \
                else (1.0 + V) / (1.0 + W)
            hi_of_min = (1.0 + V) / (1.0 + W) if V <= W \
                else (1.0 - V) / (1.0 - W)
            lo_of_min = (1.0 - V) / (1.0 + W)
            f_hi = lambda xs: np.asarray(f_vw_max(pair, xs))
            f_lo = lambda xs: np.asarray(f_vw_min(pair, xs))
            for ref, fn, which in ((hi_of_max, f_hi, "max"),
                                   (lo_of_max, f_hi, "min"),
                                   (hi_of_min, f_lo, "max"),
                                   (lo_of_min, f_lo, "min")):
                got = grid_extreme_1d(fn, 0.0, two_pi, npts=2 * 10 ** 4,
                                      which=which)
                close(got, ref, 1e-8, f"extreme {which}({V:.3f},{W:.3f})")


def test_ratio_envelope_closed_forms(capsys, rng):
    # H-envelope endpoints vs the closed forms, plus monotonicity and
    # bracketing of the whole sweep
    with criterion(capsys, "ratio-envelope-closed-forms", budget_s=60.0):
        betas = np.linspace(0.0, math.pi, 512)
        for _ in range(100):
            V, W = rng.uniform(0.01, 0.99, 2)
            p = VWPair(V, W)
            ex = h_extremes(p)
            e0 = h_envelope(p, 0.0)
            epi = h_envelope(p, math.pi)
            close(e0.h_max, ex.minmax, 1e-9, "H max at beta 0")
            close(e0.h_min, ex.maxmin, 1e-9, "H min at beta 0")
            close(epi.h_max, ex.maxmax, 1e-9, "H max at beta pi")
            close(epi.h_min, ex.minmin, 1e-9, "H min at beta pi")
            hi, lo, _, _ = h_envelope_sweep(p, betas, grid_points=4096)
            assert np.all(np.diff(hi) >= -1e-9), "H max must not decrease"
            assert np.all(np.diff(lo) <= 1e-9), "H min must not increase"
            assert np.all(hi <= ex.maxmax + 1e-9)
            assert np.all(hi >= ex.minmax - 1e-9)
            assert np.all(lo <= ex.maxmin + 1e-9)
            assert np.all(lo >= ex.minmin - 1e-9)


def test_theta_matrix_norm_oracle(capsys, rng):
    # worst-direction oscillation norm vs refined sphere maximization of
    # the directional product
    with criterion(capsys, "theta-matrix-norm-oracle"):
        for _ in range(50):
            n = int(rng.integers(2, 7))
            A, an = sample_supported(rng, n, need_complex_rightmost=True)
            b = an.blocks[0]
            t = float(rng.uniform(0.0, 2.0 * math.pi / b.omega))

            def fn(us):
                return np.array([abs(b.w_hat @ u) * theta_norm_u(b, t, u)
                                 for u in us])

            got, _ = sphere_max(fn, n, rng, samples=3000)
            close(theta_norm_mat(b, t), got, 1e-5, f"theta norm n={n}")


def test_asymptotic_dominance(capsys, rng):
    # wherever the dominance sums certify closeness, the exact condition
    # number obeys the certified bound; the grid is built with its first
    # sub-1e-3 sample inside a region where both sums are below 5e-4, so
    # the 2e-3 clause follows from the bound rather than luck
    with criterion(capsys, "asymptotic-dominance", budget_s=120.0):
        for k in range(100):
            A, an = sample_supported(rng, 5)
            A = A - an.blocks[0].r * np.eye(5)  # shift-invariant quantities
            an = analyze_spectrum(A)
            b1 = an.blocks[0]
            gap = b1.r - an.blocks[1].r
            for _ in range(50):
                y0 = rng.normal(size=5)
                if abs(b1.w_hat @ y0) > 1e-6 * np.linalg.norm(y0):
                    break
            y0h = y0 / np.linalg.norm(y0)

            T = 30.0 / gap
            for _ in range(4):
                t_fine = np.linspace(0.0, T, 900)
                et = np.array([epsilon_bounds(an, t)[0] for t in t_fine])
                eu = np.array([epsilon_bounds(an, t, u=y0h)[0]
                               for t in t_fine])
                suffix = np.maximum.accumulate(
                    np.maximum(et, eu)[::-1])[::-1]
                ok = np.nonzero(suffix < 5e-4)[0]
                if ok.size:
                    break
                T *= 2.0
            assert ok.size, f"matrix {k}: no settled tail up to T={T:.3g}"
            early = np.nonzero(et >= 1e-3)[0]
            if early.size > 16:
                early = early[np.linspace(0, early.size - 1,
                                          16).astype(int)]
            tail = np.unique(np.linspace(ok[0], t_fine.size - 1,
                                         6).astype(int))
            t_grid = np.unique(np.concatenate([t_fine[early],
                                               t_fine[tail]]))
            ser = sweep(Scenario(matrix=A, y0=y0, t_grid=t_grid), an)
            ratio = np.abs(ser.k_exact / ser.k_asym - 1.0)
            mask = ser.eps_tu < 1.0
            assert np.all(ratio[mask] <= ser.precision_bound[mask] + 1e-9), \
                f"matrix {k}: certified bound violated"
            first = np.nonzero(ser.eps_t < 1e-3)[0]
            assert first.size, f"matrix {k}: grid never settles below 1e-3"
            assert ratio[first[0]] <= 2e-3, \
                f"matrix {k}: ratio {ratio[first[0]]:.2e} at first settled t"


def test_matrix_exponential_oracle(capsys, rng):
    with criterion(capsys, "matrix-exponential-oracle"):
        for _ in range(200):
            n = int(rng.integers(2, 7))
            A = rng.normal(size=(n, n))
            t = rng.uniform(0.05, 10.0) / np.linalg.norm(A, 2)
            E = mat_exp(A, t)
            ref = taylor_expm(A, t)
            rel = np.linalg.norm(E - ref, 2) / np.linalg.norm(ref, 2)
            assert rel <= 1e-10, f"relative gap {rel:.2e}"


def test_invariant_suites(capsys, rng):
    with criterion(capsys, "invariant-suites"):
        # eigenvector phase gauge: block data and the oscillation phase
        # combination do not depend on the arbitrary complex phase
        A, an = sample_supported(rng, 5, need_complex_rightmost=True)
        b = an.blocks[0]
        es = an.eigensystem
        i = int(np.argmin(np.abs(es.eigenvalues - b.eigenvalue)))
        v = es.right_vectors[:, i]
        w = es.left_rows[i, :]
        for phi in rng.uniform(-math.pi, math.pi, size=4):
            g = np.exp(1j * phi)
            b2 = _build_supported_block(b.kind, b.group_eigenvalues,
                                        v * g, w / g, 2)
            for name in ("f", "V_mod", "W_mod", "sigma", "mu"):
                close(getattr(b2, name), getattr(b, name), 1e-10, name)
            assert np.allclose(build_Q(b2, 0.7), build_Q(b, 0.7),
                               atol=1e-10)
            d = (2.0 * b2.theta_axis + b2.delta) \
                - (2.0 * b.theta_axis + b.delta)
            assert abs(math.remainder(d, 2.0 * math.pi)) < 1e-9

        # scale invariance of both condition numbers in y0
        for _ in range(3):
            A, an = sample_supported(rng, 4)
            b1 = an.blocks[0]
            while True:
                y0 = rng.normal(size=4)
                z0 = unit(rng.normal(size=4))
                if (abs(b1.w_hat @ y0) > 1e-6 * np.linalg.norm(y0)
                        and abs(b1.w_hat @ z0) > 1e-6):
                    break
            grid = np.array([0.4, 1.6])
            for c in (1e-6, 5.0, 1e6):
                s1 = Scenario(matrix=A, y0=y0, z0=z0, t_grid=grid)
                s2 = Scenario(matrix=A, y0=c * y0, z0=z0, t_grid=grid)
                for t in grid:
                    close(k_exact(s2, t) / k_exact(s1, t), 1.0, 1e-12,
                          "exact scale invariance")
                    close(k_asym(s2, an, t) / k_asym(s1, an, t), 1.0,
                          1e-12, "asymptotic scale invariance")

        # periodicity and the scale/oscillation factorization
        for _ in range(3):
            A, an = sample_supported(rng, 4, need_complex_rightmost=True)
            b1 = an.blocks[0]
            while True:
                y0 = rng.normal(size=4)
                z0 = unit(rng.normal(size=4))
                if (abs(b1.w_hat @ y0) > 1e-6 * np.linalg.norm(y0)
                        and abs(b1.w_hat @ z0) > 1e-6):
                    break
            period = math.pi / b1.omega
            grid = np.array([0.3, 1.1, 2.6])
            for s in (Scenario(matrix=A, y0=y0, t_grid=grid),
                      Scenario(matrix=A, y0=y0, z0=z0, t_grid=grid)):
                base = osf(s, b1)
                for t in grid:
                    ka = k_asym(s, an, t)
                    close(k_asym(s, an, t + period) / ka, 1.0, 1e-10,
                          "periodicity")
                    close(base * ot(s, b1, t) / ka, 1.0, 1e-12,
                          "factorization")

        # ellipse semi-axis identity for the projection row
        for _ in range(8):
            _, an = sample_supported(rng, 5, need_complex_rightmost=True)
            b = an.blocks[0]
            close(b.sigma ** 2, (1.0 + b.W_mod) / 2.0, 1e-12, "major axis")
            close(b.mu ** 2, (1.0 - b.W_mod) / 2.0, 1e-12, "minor axis")

        # the arcsin argument in the kernel extremizer is strictly
        # admissible whenever the denominator is nonzero
        V = rng.uniform(0.0, 0.9999, 10 ** 5)
        W = rng.uniform(0.0, 0.9999, 10 ** 5)
        x = rng.uniform(-20.0, 20.0, 10 ** 5)
        absU = np.abs(V * np.exp(1j * x) + W)
        keep = absU > 0
        assert np.all(np.abs(V * W * np.sin(x))[keep] < absU[keep])
