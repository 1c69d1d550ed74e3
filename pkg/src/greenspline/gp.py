"""Gaussian-process view of the catalog: every symmetric Green's function is the
covariance of a zero-mean process (``mixed`` is Brownian motion, ``dirichlet``
the Brownian bridge, ...).

Finite-dimensional distributions are :class:`GaussianVector` objects, closed
under conditioning; the MAP estimate under a Green's-function prior is
obtained by conditioning the joint law of curve values and noisy
observations, and coincides with the smoothing spline when
``lambda = 1 / tau_sq``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .kernels import get_kernel
from .numerics import SpdMatrix, RandomSource
from .spline import DataSet

# variances at or below this are treated as exactly zero (pinned points)
DEGENERATE_TOL = 1e-15

TRANSFORMS = ("bridge", "reverse", "tied_sum", "independent_sum")


@dataclass(frozen=True)
class GaussianVector:
    grid: np.ndarray
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).reshape(-1)
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float).reshape(grid.size, grid.size)
        if mean.shape != grid.shape:
            raise ValidationError("mean and grid differ in length")
        if cov.size and np.max(np.abs(cov - cov.T)) > 1e-12:
            raise ValidationError("covariance is not symmetric")
        if cov.size and np.min(np.diag(cov)) < -1e-12:
            raise ValidationError("covariance has a negative variance")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def __len__(self) -> int:
        return self.grid.size


@dataclass(frozen=True)
class GpPrior:
    """Zero-mean prior with covariance ``scale * G`` (``scale = sigma^2 tau^2``)."""

    kernel: str
    scale: float = 1.0

    def __post_init__(self):
        k = get_kernel(self.kernel)
        if not k.symmetric:
            raise ValidationError(f"kernel {k.id!r} is not a covariance")
        if not self.scale > 0:
            raise ValidationError(f"prior scale must be positive, got {self.scale}")
        object.__setattr__(self, "kernel", k.id)


def _distinct_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float).reshape(-1)
    if np.unique(g).size != g.size:
        raise ValidationError("grid points must be distinct")
    return g


def finite_dim(kernel, grid, scale: float = 1.0) -> GaussianVector:
    """Law of ``(x(t_1), ..., x(t_n))``: zero mean, covariance ``scale * G``."""
    k = get_kernel(kernel)
    if not k.symmetric:
        raise ValidationError(f"kernel {k.id!r} is not a covariance")
    g = _distinct_grid(grid)
    cov = k.matrix(g, g)
    cov = scale * np.triu(cov) + scale * np.triu(cov, 1).T
    return GaussianVector(g, np.zeros(g.size), cov)


def condition(joint: GaussianVector, observed_indices, observed_values) -> GaussianVector:
    """Conditional law of the unobserved coordinates given observed values.

    Uses ``mu_1 + S_12 S_22^{-1} (a - mu_2)`` and ``S_11 - S_12 S_22^{-1} S_21``.

    Raises
    ------
    NumericalError
        If an observed coordinate has zero variance or ``S_22`` cannot be
        factorized within the jitter schedule.
    """
    obs = np.asarray(observed_indices, dtype=int).reshape(-1)
    a = np.asarray(observed_values, dtype=float).reshape(-1)
    n = len(joint)
    if obs.shape != a.shape:
        raise ValidationError("need one observed value per observed index")
    if np.unique(obs).size != obs.size:
        raise ValidationError("observed indices must be distinct")
    if obs.size and (obs.min() < -n or obs.max() >= n):
        raise ValidationError("observed index out of range")
    obs = obs % n if n else obs
    if obs.size == 0:
        return GaussianVector(joint.grid.copy(), joint.mean.copy(), joint.cov.copy())
    rest = np.setdiff1d(np.arange(n), obs)
    s22 = joint.cov[np.ix_(obs, obs)]
    degenerate = np.diag(s22) <= DEGENERATE_TOL
    if np.any(degenerate):
        raise NumericalError(
            f"cannot condition on zero-variance coordinates at {joint.grid[obs][degenerate].tolist()}"
        )
    spd = SpdMatrix(s22)
    s12 = joint.cov[np.ix_(rest, obs)]
    mean = joint.mean[rest] + s12 @ spd.solve(a - joint.mean[obs])
    cov = joint.cov[np.ix_(rest, rest)] - s12 @ spd.solve(s12.T)
    cov = 0.5 * (cov + cov.T)
    return GaussianVector(joint.grid[rest], mean, cov)


def condition_on_increment(kernel, grid, epsilon: float) -> GaussianVector:
    """Law of ``x`` on ``grid`` given ``(x(1) - x(1 - eps)) / eps = 0``.

    Implemented as the rank-one downdate
    ``G - eps^2 / D * g g^T`` with ``g_i = (G(t_i, 1) - G(t_i, 1 - eps)) / eps``
    and ``D = G(1, 1) + G(1 - eps, 1 - eps) - 2 G(1, 1 - eps)``.
    """
    k = get_kernel(kernel)
    eps = float(epsilon)
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    g = _distinct_grid(grid)
    if g.size and (g.min() < 0.0 or g.max() > 1.0 - eps):
        raise ValidationError(f"grid must lie in [0, 1 - eps] = [0, {1.0 - eps}]")
    base = finite_dim(k, g)
    d = float(k(1.0, 1.0) + k(1.0 - eps, 1.0 - eps) - 2.0 * k(1.0, 1.0 - eps))
    if d <= DEGENERATE_TOL:
        raise NumericalError(f"increment over [{1.0 - eps}, 1] has zero variance under {k.id!r}")
    slope = (k(g, 1.0) - k(g, 1.0 - eps)) / eps
    cov = base.cov - (eps * eps / d) * np.outer(slope, slope)
    return GaussianVector(g, np.zeros(g.size), 0.5 * (cov + cov.T))


def sample_gaussian(gv: GaussianVector, count: int, source: RandomSource) -> np.ndarray:
    """``count`` draws of ``gv`` as rows of a ``(count, len(gv))`` array.

    Zero-variance coordinates are returned as their mean exactly; the rest are
    drawn through a (jittered if needed) Cholesky factor.
    """
    if int(count) < 1:
        raise ValidationError(f"path count must be positive, got {count}")
    n = len(gv)
    out = np.tile(gv.mean, (int(count), 1))
    free = np.flatnonzero(np.diag(gv.cov) > DEGENERATE_TOL)
    if free.size:
        chol = SpdMatrix(gv.cov[np.ix_(free, free)]).cholesky
        z = source.standard_normal((int(count), free.size))
        out[:, free] += z @ chol.T
    return out.reshape(int(count), n)


def sample_paths(kernel, grid, count: int, source: RandomSource, scale: float = 1.0) -> np.ndarray:
    """Sample paths of the zero-mean process with covariance ``scale * G``.

    Paths of ``poly2_mixed`` and ``poly2_bridge`` are quadratic polynomials
    almost surely (their Gram matrices have rank one).
    """
    return sample_gaussian(finite_dim(kernel, grid, scale), count, source)


def sample_bm_increments(grid, count: int, source: RandomSource) -> np.ndarray:
    """Brownian motion built directly from independent ``N(0, dt)`` increments,
    starting from ``x(0) = 0``."""
    g = np.asarray(grid, dtype=float).reshape(-1)
    if int(count) < 1:
        raise ValidationError(f"path count must be positive, got {count}")
    if g.size == 0:
        return np.zeros((int(count), 0))
    if g[0] < 0.0:
        raise ValidationError("Brownian motion grid must start at or after 0")
    dt = np.diff(np.concatenate([[0.0], g]))
    if np.any(dt < 0.0):
        raise ValidationError("grid must be sorted increasingly")
    z = source.standard_normal((int(count), g.size))
    return np.cumsum(z * np.sqrt(dt), axis=1)


def _require_symmetric_grid(grid: np.ndarray) -> None:
    if not np.allclose(grid[::-1], 1.0 - grid, rtol=0.0, atol=1e-12):
        raise ValidationError("transform needs a grid symmetric under t -> 1 - t")


def transform_paths(paths, grid, transform: str, other=None) -> np.ndarray:
    """Pointwise path transforms on a sorted grid.

    ``bridge``: ``x(t) - t x(1)``; ``reverse``: ``x(1 - t)``; ``tied_sum``:
    ``x(t) + x(1 - t)``; ``independent_sum``: ``x(t) + y(1 - t)`` with ``y``
    an independent path set passed as ``other`` (forward plus backward
    Brownian motion).
    """
    x = np.atleast_2d(np.asarray(paths, dtype=float))
    g = np.asarray(grid, dtype=float).reshape(-1)
    if x.shape[1] != g.size:
        raise ValidationError(f"paths have {x.shape[1]} columns but the grid has {g.size} points")
    if g.size > 1 and np.any(np.diff(g) <= 0):
        raise ValidationError("grid must be strictly increasing")
    if transform == "bridge":
        if g.size == 0 or g[-1] != 1.0:
            raise ValidationError("bridge transform needs t = 1 on the grid")
        return x - np.outer(x[:, -1], g)
    if transform not in TRANSFORMS:
        raise ValidationError(f"unknown transform {transform!r}; choose one of {', '.join(TRANSFORMS)}")
    _require_symmetric_grid(g)
    if transform == "reverse":
        return x[:, ::-1].copy()
    if transform == "tied_sum":
        return x + x[:, ::-1]
    if other is None:
        raise ValidationError("independent_sum needs a second path set")
    y = np.atleast_2d(np.asarray(other, dtype=float))
    if y.shape != x.shape:
        raise ValidationError("independent_sum needs path sets of equal shape")
    return x + y[:, ::-1]


def map_estimate(prior: GpPrior, data: DataSet, tau_sq: float, grid) -> np.ndarray:
    """Posterior mean (= mode) of the curve on ``grid`` given noisy data.

    Builds the joint Gaussian of ``(theta(grid), y)`` with prior covariance
    ``scale * G`` and noise variance ``sigma^2 = scale / tau_sq``, then
    conditions on ``y``. The result is
    ``G(grid, t) (G(t, t) + I / tau_sq)^{-1} y`` independent of ``scale``.
    """
    tau_sq = float(tau_sq)
    if not np.isfinite(tau_sq) or tau_sq <= 0:
        raise ValidationError(f"tau_sq must be positive, got {tau_sq}")
    k = get_kernel(prior.kernel)
    g = np.asarray(grid, dtype=float).reshape(-1)
    if g.size == 0:
        return np.zeros(0)
    t = data.times
    noise = prior.scale / tau_sq
    gtt = k.matrix(t, t)
    gtt = np.triu(gtt) + np.triu(gtt, 1).T
    gss = k.matrix(g, g)
    gss = np.triu(gss) + np.triu(gss, 1).T
    cov = prior.scale * np.block([
        [gss, k.matrix(g, t)],
        [k.matrix(t, g), gtt],
    ])
    cov[g.size :, g.size :] += noise * np.eye(t.size)
    labels = np.concatenate([g, t])
    joint = GaussianVector(labels, np.zeros(labels.size), cov)
    post = condition(joint, np.arange(g.size, labels.size), data.values)
    return post.mean
