"""Stationary first-order Markov and iid process models.

Each model carries an analytic marginal density, a conditional kernel
(or none for iid), an exact sampler, and closed-form entropies where
known.  Everything is immutable; samplers take explicit RNG state.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._rng import make_rng
from .errors import BadParameterError, NotNormalizedError

_LOG2_2PIE = math.log2(2.0 * math.pi * math.e)


@dataclass(frozen=True)
class AnalyticEntropies:
    h_marginal: float
    h_rate: float
    mi_lag1: float


@dataclass(frozen=True)
class MarkovKernel:
    cond_pdf: callable  # (x2, x1) -> density; numpy-broadcasting
    sample_step: callable  # (x1, rng) -> x2, generic scalar fallback
    support: tuple
    split_points: callable = None  # x -> discontinuity locations
    quad_range: callable = None  # x1 -> finite window for the x2 integral


@dataclass(frozen=True)
class StationaryProcess:
    name: str
    params: dict
    marginal_pdf: callable
    marginal_sampler: callable  # (rng, n) -> ndarray
    kernel: object  # MarkovKernel or None for iid
    support: tuple
    quad_support: tuple
    marginal_split_points: tuple = ()
    analytic: AnalyticEntropies = None
    symmetric: bool = False  # even marginal and point-symmetric kernel
    uniform_marginal: bool = False
    path_kind: str = None  # dispatch tag for the fast path samplers

    @property
    def is_markov(self):
        return self.kernel is not None


@dataclass(frozen=True)
class PathSample:
    values: np.ndarray
    seed: int
    length: int
    stream: int = 0

    def __post_init__(self):
        self.values.setflags(write=False)


# ---------------------------------------------------------------------------
# built-in processes


def make_ar1(a, sigma):
    """Zero-mean Gaussian AR(1): X_n = a X_{n-1} + Z_n, Z ~ N(0, sigma^2)."""
    if not 0.0 < a < 1.0:
        raise BadParameterError("pole a must lie in (0, 1)")
    if sigma <= 0.0:
        raise BadParameterError("sigma must be positive")
    a = float(a)
    sigma = float(sigma)
    var_x = sigma**2 / (1.0 - a**2)
    sd_x = math.sqrt(var_x)
    inv_2var_x = 0.5 / var_x
    norm_x = 1.0 / math.sqrt(2.0 * math.pi * var_x)
    inv_2var_z = 0.5 / sigma**2
    norm_z = 1.0 / math.sqrt(2.0 * math.pi) / sigma

    def marginal_pdf(x):
        x = np.asarray(x, dtype=float)
        return norm_x * np.exp(-inv_2var_x * x * x)

    def cond_pdf(x2, x1):
        d = np.asarray(x2, dtype=float) - a * np.asarray(x1, dtype=float)
        return norm_z * np.exp(-inv_2var_z * d * d)

    kernel = MarkovKernel(
        cond_pdf=cond_pdf,
        sample_step=lambda x1, rng: a * x1 + rng.normal(0.0, sigma),
        support=(-np.inf, np.inf),
        split_points=None,
        quad_range=lambda x1: (a * x1 - 10.0 * sigma, a * x1 + 10.0 * sigma),
    )
    return StationaryProcess(
        name="ar1",
        params={"a": a, "sigma": sigma},
        marginal_pdf=marginal_pdf,
        marginal_sampler=lambda rng, n: rng.normal(0.0, sd_x, n),
        kernel=kernel,
        support=(-np.inf, np.inf),
        quad_support=(-10.0 * sd_x, 10.0 * sd_x),
        analytic=AnalyticEntropies(
            h_marginal=0.5 * math.log2(var_x) + 0.5 * _LOG2_2PIE,
            h_rate=0.5 * math.log2(sigma**2) + 0.5 * _LOG2_2PIE,
            mi_lag1=-0.5 * math.log2(1.0 - a**2),
        ),
        symmetric=True,
        path_kind="ar1",
    )


def wrap_interval(x, m):
    """Map onto [-m, m) modulo its length."""
    return ((np.asarray(x, dtype=float) + m) % (2.0 * m)) - m


def circular_distance(x, y, m):
    """min_k |x - y - 2kM| on the circle of circumference 2M."""
    return np.abs(wrap_interval(np.asarray(x, dtype=float) - y, m))


def make_cyclic_walk(M, a):
    """Uniform-increment random walk wrapped onto [-M, M)."""
    if not 0.0 < a <= M:
        raise BadParameterError("need 0 < a <= M")
    M = float(M)
    a = float(a)
    dens = 1.0 / (2.0 * a)

    def marginal_pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= -M) & (x < M), 1.0 / (2.0 * M), 0.0)

    def cond_pdf(x2, x1):
        return np.where(circular_distance(x2, x1, M) <= a, dens, 0.0)

    kernel = MarkovKernel(
        cond_pdf=cond_pdf,
        sample_step=lambda x1, rng: float(
            wrap_interval(x1 + rng.uniform(-a, a), M)
        ),
        support=(-M, M),
        split_points=lambda x: (
            float(wrap_interval(x - a, M)),
            float(wrap_interval(x + a, M)),
        ),
        quad_range=lambda x1: (-M, M),
    )
    return StationaryProcess(
        name="cyclic_walk",
        params={"M": M, "a": a},
        marginal_pdf=marginal_pdf,
        marginal_sampler=lambda rng, n: rng.uniform(-M, M, n),
        kernel=kernel,
        support=(-M, M),
        quad_support=(-M, M),
        marginal_split_points=(),
        analytic=AnalyticEntropies(
            h_marginal=math.log2(2.0 * M),
            h_rate=math.log2(2.0 * a),
            mi_lag1=math.log2(M / a),
        ),
        symmetric=True,
        uniform_marginal=True,
        path_kind="cyclic",
    )


def make_tightness_example():
    """Block-alternating chain on [0, 4).

    From the even blocks [0,1) u [2,3) the next sample is uniform on the
    odd blocks [1,2) u [3,4), and vice versa; the marginal is uniform.
    """

    def marginal_pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0.0) & (x < 4.0), 0.25, 0.0)

    def _even(x):
        x = np.asarray(x, dtype=float)
        return (np.floor(x).astype(int) % 2) == 0

    def cond_pdf(x2, x1):
        x2 = np.asarray(x2, dtype=float)
        in_dom = (x2 >= 0.0) & (x2 < 4.0)
        hit = _even(x2) != _even(x1)
        return np.where(in_dom & hit, 0.5, 0.0)

    def sample_step(x1, rng):
        parity = (int(math.floor(x1)) + 1) % 2
        return 2.0 * rng.integers(0, 2) + parity + rng.uniform(0.0, 1.0)

    kernel = MarkovKernel(
        cond_pdf=cond_pdf,
        sample_step=sample_step,
        support=(0.0, 4.0),
        split_points=lambda x: (1.0, 2.0, 3.0),
        quad_range=lambda x1: (0.0, 4.0),
    )
    return StationaryProcess(
        name="tightness",
        params={},
        marginal_pdf=marginal_pdf,
        marginal_sampler=lambda rng, n: rng.uniform(0.0, 4.0, n),
        kernel=kernel,
        support=(0.0, 4.0),
        quad_support=(0.0, 4.0),
        marginal_split_points=(1.0, 2.0, 3.0),
        analytic=AnalyticEntropies(h_marginal=2.0, h_rate=1.0, mi_lag1=1.0),
        uniform_marginal=True,
        path_kind="alternating",
    )


def make_iid(
    marginal_pdf,
    marginal_sampler,
    support,
    quad_support=None,
    split_points=(),
    analytic=None,
    symmetric=False,
    uniform_marginal=False,
    name="iid",
    params=None,
    check_normalization=True,
):
    """Memoryless process from a marginal density and sampler."""
    from .estimate import DEFAULT_QUAD, quad

    if quad_support is None:
        quad_support = support
    if check_normalization:
        lo, hi = quad_support
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise BadParameterError("iid process needs a finite quadrature window")
        total = quad(marginal_pdf, lo, hi, DEFAULT_QUAD, points=split_points)
        if abs(total - 1.0) > 1e-6:
            raise NotNormalizedError(f"marginal integrates to {total}, not 1")
    return StationaryProcess(
        name=name,
        params=params or {},
        marginal_pdf=marginal_pdf,
        marginal_sampler=marginal_sampler,
        kernel=None,
        support=support,
        quad_support=quad_support,
        marginal_split_points=tuple(split_points),
        analytic=analytic,
        symmetric=symmetric,
        uniform_marginal=uniform_marginal,
        path_kind="iid",
    )


def make_iid_gaussian(sigma=1.0):
    if sigma <= 0:
        raise BadParameterError("sigma must be positive")
    sigma = float(sigma)
    norm = 1.0 / math.sqrt(2.0 * math.pi) / sigma
    inv_2var = 0.5 / sigma**2
    h = 0.5 * math.log2(sigma**2) + 0.5 * _LOG2_2PIE
    return make_iid(
        marginal_pdf=lambda x: norm
        * np.exp(-inv_2var * np.asarray(x, dtype=float) ** 2),
        marginal_sampler=lambda rng, n: rng.normal(0.0, sigma, n),
        support=(-np.inf, np.inf),
        quad_support=(-10.0 * sigma, 10.0 * sigma),
        analytic=AnalyticEntropies(h_marginal=h, h_rate=h, mi_lag1=0.0),
        symmetric=True,
        name="iid_gaussian",
        params={"sigma": sigma},
        check_normalization=False,
    )


def make_iid_uniform(lo=0.0, hi=1.0):
    if not hi > lo:
        raise BadParameterError("need hi > lo")
    lo = float(lo)
    hi = float(hi)
    dens = 1.0 / (hi - lo)
    h = math.log2(hi - lo)
    return make_iid(
        marginal_pdf=lambda x: np.where(
            (np.asarray(x, dtype=float) >= lo) & (np.asarray(x, dtype=float) < hi),
            dens,
            0.0,
        ),
        marginal_sampler=lambda rng, n: rng.uniform(lo, hi, n),
        support=(lo, hi),
        analytic=AnalyticEntropies(h_marginal=h, h_rate=h, mi_lag1=0.0),
        symmetric=(lo == -hi),
        uniform_marginal=True,
        name="iid_uniform",
        params={"lo": lo, "hi": hi},
        check_normalization=False,
    )


# ---------------------------------------------------------------------------
# path sampling


def sample_path(process, n, seed, stream=0):
    """Length-n realization; deterministic in (seed, stream) per backend."""
    if n < 1:
        raise BadParameterError("need n >= 1")
    rng = make_rng(seed, stream)
    kind = process.path_kind
    if kind == "iid" or process.kernel is None:
        values = np.asarray(process.marginal_sampler(rng, n), dtype=float)
    elif kind == "ar1":
        a = process.params["a"]
        sigma = process.params["sigma"]
        x0 = float(process.marginal_sampler(rng, 1)[0])
        z = rng.normal(0.0, sigma, n - 1)
        values = _kernels.ar1_path(x0, a, z)
    elif kind == "cyclic":
        m = process.params["M"]
        a = process.params["a"]
        x0 = float(process.marginal_sampler(rng, 1)[0])
        steps = rng.uniform(-a, a, n - 1)
        values = _kernels.cyclic_path(x0, steps, m)
    elif kind == "alternating":
        x0 = float(process.marginal_sampler(rng, 1)[0])
        blocks = rng.integers(0, 2, n - 1).astype(np.float64)
        offsets = rng.uniform(0.0, 1.0, n - 1)
        values = _kernels.alternating_blocks_path(x0, blocks, offsets)
    else:
        # generic scalar fallback for custom kernels
        values = np.empty(n)
        values[0] = float(process.marginal_sampler(rng, 1)[0])
        step = process.kernel.sample_step
        for i in range(1, n):
            values[i] = step(values[i - 1], rng)
    return PathSample(values=values, seed=seed, length=n, stream=stream)


def stationarity_residual(process, n_grid=64):
    """max_x | int f(x2|x1) f(x1) dx1 - f(x2) | on an interior grid."""
    from .estimate import DEFAULT_QUAD, quad

    if process.kernel is None:
        return 0.0
    lo, hi = process.quad_support
    eps = 1e-6 * (hi - lo)
    xs2 = np.linspace(lo + eps, hi - eps, n_grid) + 1e-9
    cond = process.kernel.cond_pdf
    f = process.marginal_pdf
    worst = 0.0
    for x2 in xs2:
        pts = ()
        if process.kernel.split_points is not None:
            pts = process.kernel.split_points(x2)
        got = quad(lambda x1: cond(x2, x1) * f(x1), lo, hi, DEFAULT_QUAD, points=pts)
        worst = max(worst, abs(got - float(f(x2))))
    return worst


# ---------------------------------------------------------------------------
# pushforward through a piecewise function


def pushforward_process(f, process):
    """Process of Y = g(X): exact marginal and the mixture kernel

    f_{Y2|Y1}(y2|y1) = sum_{x1 in preimage(y1)} w(x1) f_{Y2|X1}(y2|x1)

    with weights w proportional to f_X(x1)/|g'(x1)|.  This is the true
    conditional law whether or not the output process is Markov; treating
    it as a first-order kernel is exact precisely in the lumpable case.
    """
    from .estimate import output_cond_pdf

    if not f.all_injective:
        raise BadParameterError("pushforward needs an all-injective function")

    def marginal_pdf(ys):
        ys = np.asarray(ys, dtype=float)
        out = np.zeros_like(ys)
        for _, xs, dabs, valid in f.preimage_terms(ys):
            vals = np.where(valid, process.marginal_pdf(np.where(valid, xs, 0.0)), 0.0)
            out += np.where(valid, vals / np.where(valid, dabs, 1.0), 0.0)
        return out

    def marginal_sampler(rng, n):
        return f.eval_array(np.asarray(process.marginal_sampler(rng, n), dtype=float))

    # finite output window from the truncated input window
    qlo, qhi = process.quad_support
    ends = []
    splits = []
    for b in f.branches:
        a = max(b.domain_lo, qlo)
        c = min(b.domain_hi, qhi)
        if c <= a:
            continue
        ya, yc = float(b.forward(a)), float(b.forward(c))
        ends.extend((ya, yc))
        splits.extend((min(ya, yc), max(ya, yc)))
    if not ends:
        raise BadParameterError("function does not cover the process support")
    y_lo, y_hi = min(ends), max(ends)
    for s in process.marginal_split_points:
        if f.domain_lo <= s < f.domain_hi:
            splits.append(float(f.eval(s)))

    base_cond = None
    kernel = None
    if process.kernel is not None:
        base_cond = process.kernel.cond_pdf

        def cond_pdf(y2, y1):
            y2 = np.asarray(y2, dtype=float)
            pts = f.preimage(float(y1))
            num = 0.0
            terms = []
            for p in pts:
                if not p.pointwise:
                    continue
                b = f.branches[p.branch - 1]
                w = float(process.marginal_pdf(p.x)) / float(
                    np.abs(b.derivative(p.x))
                )
                if w <= 0.0:
                    continue
                num += w
                terms.append((p.x, w))
            if num <= 0.0 or not terms:
                return np.zeros_like(y2)
            out = np.zeros_like(y2)
            for x1, w in terms:
                out += (w / num) * output_cond_pdf(f, base_cond, x1, y2)
            return out

        def split_points(y):
            pts = []
            for p in f.preimage(float(y)):
                if not p.pointwise:
                    continue
                if process.kernel.split_points is not None:
                    for s in process.kernel.split_points(p.x):
                        if f.domain_lo <= s < f.domain_hi:
                            pts.append(float(f.eval(s)))
            pts.extend(splits)
            return tuple(pts)

        kernel = MarkovKernel(
            cond_pdf=cond_pdf,
            sample_step=None,
            support=(y_lo, y_hi),
            split_points=split_points,
            quad_range=lambda y1: (y_lo, y_hi),
        )

    from .pbf import has_identical_ranges, is_odd_map, is_unit_slope

    half = min(abs(qlo), abs(qhi))
    symmetric = process.symmetric and is_odd_map(f, half)
    uniform = (
        process.uniform_marginal
        and is_unit_slope(f, qlo, qhi)
        and (len(f.branches) == 1 or has_identical_ranges(f))
    )
    interior = sorted({s for s in splits if y_lo < s < y_hi})
    return StationaryProcess(
        name=f"pushforward({process.name})",
        params=dict(process.params),
        marginal_pdf=marginal_pdf,
        marginal_sampler=marginal_sampler,
        kernel=kernel,
        support=(y_lo, y_hi),
        quad_support=(y_lo, y_hi),
        marginal_split_points=tuple(interior),
        analytic=None,
        symmetric=symmetric,
        uniform_marginal=uniform,
        path_kind=None if kernel is not None else "iid",
    )
