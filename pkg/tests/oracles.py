"""Independent brute-force references used by the test suite.

Nothing here touches the library's closed forms: the matrix exponential is
a scaled Taylor series, maxima come from dense grids or sphere sampling
followed by a local polish.  Slow on purpose; correctness is the only goal.
"""
import numpy as np
import scipy.linalg
import scipy.optimize


def taylor_expm(A, t=1.0, terms=60):
    """e^{tA} by scaling until ||tA / 2^k||_2 <= 0.5, a 60-term power
    series, and k repeated squarings."""
    M = np.asarray(A, dtype=float) * t
    norm = scipy.linalg.svdvals(M)[0] if M.size else 0.0
    k = 0
    while norm > 0.5:
        norm /= 2.0
        k += 1
    S = M / (2.0 ** k)
    E = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for j in range(1, terms + 1):
        term = term @ S / j
        E = E + term
    for _ in range(k):
        E = E @ E
    return E


def sphere_max(fun, n, rng, samples=10 ** 4, refine=True, rounds=3):
    """Maximum of fun(u) over real unit vectors u.

    fun must accept a batch (m, n) array and return (m,) values.  The best
    sample is polished with Nelder-Mead in tangent coordinates around the
    current best point (the radial direction is factored out, otherwise the
    simplex stalls on the scale-invariant ray), re-centering a few times.
    """
    us = rng.normal(size=(samples, n))
    us /= np.linalg.norm(us, axis=1, keepdims=True)
    vals = fun(us)
    best = int(np.argmax(vals))
    u0, v0 = us[best], vals[best]
    if not refine:
        return v0, u0

    for _ in range(rounds):
        T = scipy.linalg.null_space(u0[None, :])  # (n, n-1) tangent basis

        def neg(theta):
            z = u0 + T @ theta
            return -float(fun((z / np.linalg.norm(z))[None, :])[0])

        res = scipy.optimize.minimize(
            neg, np.zeros(n - 1), method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 6000,
                     "initial_simplex": _init_simplex(n - 1, 1e-2)})
        z = u0 + T @ res.x
        z /= np.linalg.norm(z)
        v1 = float(fun(z[None, :])[0])
        if v1 > v0:
            u0, v0 = z, v1
        else:
            break
    return v0, u0


def _init_simplex(dim, size):
    s = np.zeros((dim + 1, dim))
    s[1:] = np.eye(dim) * size
    return s


def _f_vw_values(V, W, alphas, x):
    return (1.0 + V * np.cos(x + alphas)) / (1.0 - W * np.cos(alphas))


def _polish_1d(fun, lo, hi, sign):
    res = scipy.optimize.minimize_scalar(
        lambda a: sign * fun(a), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-13})
    return sign * res.fun


def grid_extreme_f(V, W, x, npts=10 ** 5, which="max"):
    """Extreme of alpha -> (1+V cos(x+alpha))/(1-W cos alpha) by a dense
    grid and a bounded 1-D polish around the best cell."""
    alphas = np.linspace(-np.pi, np.pi, npts, endpoint=False)
    vals = _f_vw_values(V, W, alphas, x)
    idx = int(np.argmax(vals) if which == "max" else np.argmin(vals))
    step = 2 * np.pi / npts
    lo, hi = alphas[idx] - step, alphas[idx] + step
    fun = lambda a: float(_f_vw_values(V, W, np.asarray(a), x))
    return _polish_1d(fun, lo, hi, -1.0 if which == "max" else 1.0)


def grid_extreme_1d(fun, lo, hi, npts=10 ** 5, which="max"):
    """Extreme of a scalar function on [lo, hi] by grid plus bounded polish.
    fun must accept a numpy array."""
    xs = np.linspace(lo, hi, npts)
    vals = np.asarray(fun(xs), dtype=float)
    idx = int(np.argmax(vals) if which == "max" else np.argmin(vals))
    a = max(lo, xs[idx] - (hi - lo) / (npts - 1))
    b = min(hi, xs[idx] + (hi - lo) / (npts - 1))
    scalar = lambda x: float(np.asarray(fun(np.asarray([x])))[0])
    return _polish_1d(scalar, a, b, -1.0 if which == "max" else 1.0)
