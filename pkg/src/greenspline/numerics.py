"""Numerical substrate: SPD solves with jitter escalation, split-panel Simpson
quadrature, second differences and a seeded Gaussian source.

Everything here is dense and desk scale; the matrices that show up are Gram
matrices of at most a few hundred observation times.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DomainError, NumericalError, ValidationError

#: Diagonal jitter tried in order when a plain Cholesky factorization fails.
JITTER_SCHEDULE = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)

SYMMETRY_TOL = 1e-12


class SpdMatrix:
    """Symmetric positive (semi)definite matrix with a cached Cholesky factor.

    Parameters
    ----------
    matrix : array_like, shape (n, n)
        Must be symmetric to ``1e-12`` relative to its largest entry. It is
        symmetrized exactly before factorization.
    allow_jitter : bool
        If False, only the unjittered factorization is attempted.

    Attributes
    ----------
    jitter_applied : float
        Diagonal shift that made the factorization succeed (0.0 if none).
    """

    def __init__(self, matrix, allow_jitter: bool = True):
        a = np.array(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] == 0:
            raise ValidationError("cannot factorize an empty matrix")
        if not np.all(np.isfinite(a)):
            raise ValidationError("matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(a))))
        asym = float(np.max(np.abs(a - a.T)))
        if asym > SYMMETRY_TOL * scale:
            raise ValidationError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
        self.matrix = 0.5 * (a + a.T)
        self.n = a.shape[0]
        self.jitter_applied = 0.0
        self._factor = None
        self._factorize(JITTER_SCHEDULE if allow_jitter else JITTER_SCHEDULE[:1])

    def _factorize(self, schedule: Sequence[float]) -> None:
        eye = np.eye(self.n)
        for jitter in schedule:
            try:
                c, lower = cho_factor(self.matrix + jitter * eye, lower=True)
            except LinAlgError:
                continue
            if np.all(np.diag(c) > 0.0):
                self._factor = (c, lower)
                self.jitter_applied = jitter
                return
        raise NumericalError(
            f"matrix is not positive definite even with diagonal jitter {schedule[-1]:g}"
        )

    @property
    def cholesky(self) -> np.ndarray:
        """Lower-triangular factor ``L`` with ``L @ L.T = A + jitter * I``."""
        c, _ = self._factor
        return np.tril(c)

    def solve(self, b):
        """Solve ``(A + jitter I) x = b`` for one or more right-hand sides.

        One step of iterative refinement is applied to the Cholesky solution.
        """
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise ValidationError(f"right-hand side has {b.shape[0]} rows, expected {self.n}")
        x = cho_solve(self._factor, b)
        a = self.matrix + self.jitter_applied * np.eye(self.n)
        return x + cho_solve(self._factor, b - a @ x)


def spd_solve(a, b, allow_jitter: bool = True) -> np.ndarray:
    """Solve ``a x = b`` for symmetric positive definite ``a``.

    See :class:`SpdMatrix` for the jitter policy; use that class directly when
    the applied jitter needs to be recorded.
    """
    return SpdMatrix(a, allow_jitter=allow_jitter).solve(b)


def _evaluate(f: Callable, x: np.ndarray) -> np.ndarray:
    # Accept both vectorized callables and scalar-only ones.
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape == x.shape:
            return y
        if y.ndim == 0:
            return np.full(x.shape, float(y))
    except (TypeError, ValueError):
        pass
    return np.array([float(f(xi)) for xi in x])


def simpson_weights(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Simpson with ``panels`` subintervals."""
    if panels <= 0 or panels % 2:
        raise ValidationError(f"Simpson needs an even positive panel count, got {panels}")
    x = np.linspace(a, b, panels + 1)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (b - a) / (3.0 * panels)
    return x, w


def simpson(f: Callable, a: float, b: float, panels: int, kinks: Sequence[float] = ()) -> float:
    """Composite Simpson rule on ``[a, b]``, restarted at every kink.

    Each piece between consecutive break points gets ``panels`` subintervals,
    so the rule is exact for integrands that are cubic on every piece. At a
    kink the integrand is sampled one ulp inside the piece, which picks the
    correct one-sided limit when the integrand jumps there.
    """
    if a > b:
        raise ValidationError(f"need a <= b, got [{a}, {b}]")
    if panels <= 0 or panels % 2:
        raise ValidationError(f"Simpson needs an even positive panel count, got {panels}")
    breaks = {float(k) for k in kinks}
    if any(k < a or k > b for k in breaks):
        raise ValidationError("kinks must lie inside the integration interval")
    edges = [a, *sorted(k for k in breaks if a < k < b), b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        x, w = simpson_weights(lo, hi, panels)
        if lo in breaks:
            x[0] = np.nextafter(lo, hi)
        if hi in breaks:
            x[-1] = np.nextafter(hi, lo)
        total += float(w @ _evaluate(f, x))
    return total


def second_difference(f: Callable[[float], float], t: float, h: float) -> float:
    """Negative central second difference ``-(f(t-h) - 2 f(t) + f(t+h)) / h**2``."""
    if h <= 0:
        raise ValidationError(f"step must be positive, got {h}")
    if t - h < 0.0 or t + h > 1.0:
        raise DomainError(f"stencil [{t - h}, {t + h}] leaves [0, 1]")
    return -(f(t - h) - 2.0 * f(t) + f(t + h)) / (h * h)


class RandomSource:
    """Seeded stream of standard normal draws.

    Child sources are derived deterministically from ``(seed, stream index)``
    through :class:`numpy.random.SeedSequence` spawn keys, so parallel work can
    be split without sharing a generator.
    """

    def __init__(self, seed: int, _spawn_key: tuple[int, ...] = ()):
        if not 0 <= int(seed) < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.spawn_key = tuple(_spawn_key)
        self.draws = 0
        ss = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self._rng = np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RandomSource":
        return RandomSource(self.seed, self.spawn_key + (int(index),))

    def standard_normal(self, size) -> np.ndarray:
        out = self._rng.standard_normal(size)
        self.draws += out.size
        return out

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, spawn_key={self.spawn_key}, draws={self.draws})"


def gaussian_draws(source: RandomSource, n: int) -> np.ndarray:
    """``n`` i.i.d. standard normal draws from ``source``."""
    if n < 0:
        raise ValidationError(f"count must be non-negative, got {n}")
    return source.standard_normal(n)
