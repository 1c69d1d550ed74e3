"""Self-checks run by ``greenspline verify``.

Each check returns a :class:`CheckResult` holding the worst residual found and
the tolerance it is held to. Suites are deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import gp, kernels, series, spline
from .kernels import CATALOG, SYMMETRIC_IDS, get_kernel
from .numerics import RandomSource

SUITES = ("kernels", "series", "spline", "gp")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.suite}/{self.name}: residual {self.residual:.3e} (tol {self.tol:.1e})"


PI = np.pi

#: Test pairs (f, h = -f'') with f inside each kernel's subspace; for the
#: first-order kernel h = f' instead.
POISSON_PAIRS: dict[str, tuple[Callable, Callable]] = {
    "dirichlet": (lambda t: np.sin(PI * t), lambda s: PI**2 * np.sin(PI * s)),
    "mixed": (lambda t: np.sin(PI * t / 2), lambda s: PI**2 / 4 * np.sin(PI * s / 2)),
    "balanced_periodic": (
        lambda t: np.cos(2 * PI * t) + np.sin(2 * PI * t),
        lambda s: 4 * PI**2 * (np.cos(2 * PI * s) + np.sin(2 * PI * s)),
    ),
    "odd": (lambda t: np.sin(2 * PI * t), lambda s: 4 * PI**2 * np.sin(2 * PI * s)),
    "mixed_zero_mean": (
        lambda t: np.sin(PI * t / 2) + 3 / PI * (t * t - 2 * t),
        lambda s: PI**2 / 4 * np.sin(PI * s / 2) - 6 / PI,
    ),
    "dirichlet_zero_mean": (
        lambda t: np.sin(PI * t) - 12 / PI * t * (1 - t),
        lambda s: PI**2 * np.sin(PI * s) - 24 / PI,
    ),
    "poly2_mixed": (lambda t: (t - 2) * t, lambda s: np.full_like(s, -2.0)),
    "poly2_bridge": (lambda t: t * (1 - t), lambda s: np.full_like(s, 2.0)),
    "heaviside_first_order": (lambda t: np.sin(PI * t), lambda s: PI * np.cos(PI * s)),
}


def random_dataset(rng: np.random.Generator, max_m: int = 20) -> spline.DataSet:
    m = int(rng.integers(1, max_m + 1))
    times = np.sort(rng.choice(np.arange(1, 1000), size=m, replace=False)) / 1000.0
    return spline.DataSet(times, rng.normal(size=m))


def kernel_checks(seed: int = 0) -> Iterator[CheckResult]:
    rng = np.random.default_rng(seed)
    s, t = rng.random(10_000), rng.random(10_000)
    for kid in SYMMETRIC_IDS:
        k = get_kernel(kid)
        yield CheckResult("kernels", f"symmetry/{kid}", float(np.max(np.abs(k(s, t) - k(t, s)))), 1e-12)
        worst = 0.0
        for _ in range(20):
            times = np.sort(rng.random(int(rng.integers(2, 51))))
            worst = max(worst, -float(np.linalg.eigvalsh(kernels.gram(k, times)).min()))
        yield CheckResult("kernels", f"psd/{kid}", max(worst, 0.0), 1e-10)
    for kid in CATALOG:
        rep = kernels.check_constraints(kid, 100)
        yield CheckResult("kernels", f"constraints/{kid}", rep.max_residual, 1e-8)
        k = get_kernel(kid)
        worst = 0.0
        for si, ti in [(0.2, 0.7), (0.3, 0.1), (0.65, 0.15), (0.8, 0.5)]:
            worst = max(worst, abs(kernels.offdiag_laplacian_check(k, si, ti, 1e-4)))
        yield CheckResult("kernels", f"offdiag_laplacian/{kid}", worst, 1e-4)
    odd = get_kernel("odd")
    s = rng.random(1000)
    seam = 1.0 - s
    jump = np.abs(odd(s, np.nextafter(seam, 0.0)) - odd(s, np.nextafter(seam, 1.0)))
    yield CheckResult("kernels", "seam_continuity/odd", float(jump.max()), 1e-12)


def series_checks(n: int = series.DEFAULT_N) -> Iterator[CheckResult]:
    grid = np.linspace(0.025, 0.975, 21)
    ss, tt = np.meshgrid(grid, grid)
    for kid, mode in series.SERIES_FOR_KERNEL.items():
        spec = series.SeriesSpec(n, mode)
        err = float(np.max(np.abs(series.truncated_green(spec, ss, tt) - get_kernel(kid)(ss, tt))))
        yield CheckResult("series", f"agreement/{kid}", err, series.tail_bound(spec))
    u = np.linspace(0.0, 1.0, 11)
    err = float(np.max(np.abs(series.cosine_partial_sum(u, n) - series.cosine_series_closed(u))))
    yield CheckResult("series", "cosine_identity", err, 1.0 / (4 * PI**2 * n))
    tgrid = np.linspace(0.0, 1.0, 21)
    for kid, (f, h) in POISSON_PAIRS.items():
        err = float(np.max(np.abs(series.apply_kernel(kid, h, tgrid, 2048) - f(tgrid))))
        yield CheckResult("series", f"poisson/{kid}", err, 1e-7)
    h1, h2 = (lambda s: np.exp(s)), (lambda s: np.cos(3 * s))
    worst = 0.0
    for kid in CATALOG:
        lhs = series.apply_kernel(kid, lambda s: 2.0 * h1(s) - 0.5 * h2(s), tgrid, 256)
        rhs = 2.0 * series.apply_kernel(kid, h1, tgrid, 256) - 0.5 * series.apply_kernel(kid, h2, tgrid, 256)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    yield CheckResult("series", "linearity", worst, 1e-10)


def spline_checks(seed: int = 0, datasets: int = 50) -> Iterator[CheckResult]:
    rng = np.random.default_rng(seed)
    data = [random_dataset(rng) for _ in range(datasets)]
    grid = np.linspace(0.0, 1.0, 101)
    resid = equiv = 0.0
    for kid in SYMMETRIC_IDS:
        for d in data:
            for lam in (0.01, 0.1, 1.0):
                f = spline.fit(kid, d, lam)
                resid = max(resid, float(np.max(np.abs(d.values - f.evaluate_grid(d.times) - lam * f.coefficients))))
                m = gp.map_estimate(gp.GpPrior(kid), d, 1.0 / lam, grid)
                equiv = max(equiv, float(np.max(np.abs(m - f.evaluate_grid(grid)))))
    yield CheckResult("spline", "representer_residual", resid, 1e-9)
    yield CheckResult("spline", "map_equivalence", equiv, 1e-10)
    interp = shrink = 0.0
    for d in data:
        f = spline.fit("dirichlet", d, 1e-10)
        interp = max(interp, float(np.max(np.abs(f.evaluate_grid(d.times) - d.values))))
        g_inf = float(np.max(np.sum(np.abs(kernels.gram("dirichlet", d.times)), axis=1)))
        bound = float(np.max(np.abs(d.values))) * g_inf / 1e4 + 1e-9
        f = spline.fit("dirichlet", d, 1e4)
        shrink = max(shrink, float(np.max(np.abs(f.evaluate_grid(grid)))) - bound)
    yield CheckResult("spline", "interpolation_limit", interp, 1e-6)
    yield CheckResult("spline", "shrinkage_excess", max(shrink, 0.0), 0.0)


def gp_checks(seed: int = 0, count: int = 100_000) -> Iterator[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        g = np.sort(rng.choice(np.arange(1, 1000), size=int(rng.integers(1, 15)), replace=False)) / 1000.0
        bm = gp.finite_dim("mixed", np.append(g, 1.0))
        bridge = gp.condition(bm, [g.size], [0.0])
        worst = max(worst, float(np.max(np.abs(bridge.cov - kernels.gram("dirichlet", g)))))
    yield CheckResult("gp", "bridge_identity", worst, 1e-12)
    worst = 0.0
    for eps in (0.5, 0.1, 0.01):
        g = np.sort(rng.random(10)) * (1.0 - eps)
        diff = gp.condition_on_increment("mixed", g, eps).cov - gp.finite_dim("mixed", g).cov
        worst = max(worst, float(np.max(np.abs(diff))))
    yield CheckResult("gp", "increment_independence", worst, 1e-14)
    for name, emp, target in monte_carlo_covariances(seed, count):
        # independent_sum has unit variance on the whole grid, so its sup over
        # the grid gets a simultaneous (Bonferroni-level) bound.
        err, tol = mc_deviation(emp, target, count, 4.0 if name == "independent_sum" else 3.0)
        yield CheckResult("gp", f"monte_carlo/{name}", err, tol)


def mc_deviation(empirical: np.ndarray, target: np.ndarray, count: int, nse: float = 3.0) -> tuple[float, float]:
    """Largest entrywise deviation and ``nse`` standard errors of the
    largest-variance entry, ``nse * sqrt(2 max(diag)^2 / count)``.

    ``Var(x_i x_j) = K_ii K_jj + K_ij^2 <= 2 max(diag)^2`` for a zero-mean
    Gaussian pair, so this bounds the standard error of every entry.
    """
    v = float(np.max(np.diag(target)))
    return float(np.max(np.abs(empirical - target))), nse * np.sqrt(2.0 * v * v / count)


def monte_carlo_covariances(seed: int, count: int, points: int = 21):
    """Empirical versus analytic covariances for the Brownian constructions."""
    g = np.linspace(0.0, 1.0, points)
    S, T = np.meshgrid(g, g, indexing="ij")
    root = RandomSource(seed)

    def emp(p):
        return p.T @ p / p.shape[0]

    bm_chol = gp.sample_paths("mixed", g, count, root.child(0))
    bm_inc = gp.sample_bm_increments(g, count, root.child(1))
    other = gp.sample_bm_increments(g, count, root.child(2))
    bm = np.minimum(S, T)
    yield "bm_cholesky", emp(bm_chol), bm
    yield "bm_increments", emp(bm_inc), bm
    yield "bridge", emp(gp.transform_paths(bm_inc, g, "bridge")), np.minimum(S, T) - S * T
    yield "reverse", emp(gp.transform_paths(bm_inc, g, "reverse")), 1.0 - np.maximum(S, T)
    yield (
        "tied_sum",
        emp(gp.transform_paths(bm_inc, g, "tied_sum")),
        np.minimum(S, T) + np.minimum(S, 1 - T) + np.minimum(T, 1 - S) + np.minimum(1 - S, 1 - T),
    )
    yield (
        "independent_sum",
        emp(gp.transform_paths(bm_inc, g, "independent_sum", other)),
        np.minimum(S, T) + 1.0 - np.maximum(S, T),
    )


def run(suites=SUITES, n: int = series.DEFAULT_N, seed: int = 0) -> list[CheckResult]:
    out: list[CheckResult] = []
    for suite in suites:
        if suite == "kernels":
            out += kernel_checks(seed)
        elif suite == "series":
            out += series_checks(n)
        elif suite == "spline":
            out += spline_checks(seed)
        elif suite == "gp":
            out += gp_checks(seed)
        else:
            raise ValueError(f"unknown suite {suite!r}")
    return out
