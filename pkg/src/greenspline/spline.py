"""First-derivative-penalty smoothing splines through the representer system.

The minimizer of ``sum (y_i - theta(t_i))^2 + lam * int theta'(t)^2 dt`` over a
constrained subspace is ``theta(t) = sum_i c_i G(t_i, t)`` where ``G`` is the
subspace's Green's function and ``(G + lam I) c = y``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .kernels import get_kernel, gram, validate_times
from .numerics import SpdMatrix

# diag(G) at or below this marks a time where every representer vanishes
PIN_TOL = 1e-15


@dataclass(frozen=True)
class DataSet:
    """Observation pairs ``(t_i, y_i)`` with strictly increasing times in [0, 1]."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = validate_times(self.times)
        y = np.asarray(self.values, dtype=float).reshape(-1)
        if t.size < 1:
            raise ValidationError("a data set needs at least one observation")
        if y.shape != t.shape:
            raise ValidationError(f"{t.size} times but {y.size} values")
        if not np.all(np.isfinite(y)):
            raise ValidationError("values must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", y)

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class SplineFit:
    kernel: str
    lam: float
    times: np.ndarray
    coefficients: np.ndarray
    jitter_applied: float = 0.0
    pinned_times: tuple[float, ...] = field(default=())

    def evaluate(self, t) -> float:
        """``theta_hat(t) = sum_i c_i G(t_i, t)`` at a single point."""
        return float(self.evaluate_grid(np.atleast_1d(np.asarray(t, dtype=float)))[0])

    def evaluate_grid(self, grid) -> np.ndarray:
        grid = np.asarray(grid, dtype=float).reshape(-1)
        if grid.size == 0:
            return np.zeros(0)
        k = get_kernel(self.kernel)
        return k.matrix(grid, self.times) @ self.coefficients

    def penalty(self) -> float:
        """Roughness ``int theta_hat'^2``, which equals ``c^T G c`` on every
        catalog subspace."""
        c = self.coefficients
        return float(c @ gram(self.kernel, self.times) @ c)

    def objective(self, data: DataSet) -> float:
        """Penalized criterion ``sum (y_i - theta_hat(t_i))^2 + lam * penalty``."""
        return objective(self, data, self.coefficients)

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "lambda": self.lam,
            "times": [float(x) for x in self.times],
            "coefficients": [float(x) for x in self.coefficients],
            "jitter_applied": self.jitter_applied,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SplineFit":
        try:
            times = validate_times(d["times"])
            coef = np.asarray(d["coefficients"], dtype=float)
            fit = cls(
                kernel=get_kernel(d["kernel"]).id,
                lam=float(d["lambda"]),
                times=times,
                coefficients=coef,
                jitter_applied=float(d.get("jitter_applied", 0.0)),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed spline fit document: {exc}") from None
        if coef.shape != times.shape:
            raise ValidationError("coefficients and times differ in length")
        return fit

    @classmethod
    def from_json(cls, text: str) -> "SplineFit":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from None


def fit(kernel, data: DataSet, lam: float) -> SplineFit:
    """Solve ``(G + lam I) c = y`` for the representer coefficients.

    ``lam = 0`` interpolates and is only accepted when the Gram matrix
    factorizes without jitter. Observation times where the kernel is pinned to
    zero are allowed for ``lam > 0``; they are listed in
    ``SplineFit.pinned_times`` and reported through :mod:`warnings`.
    """
    k = get_kernel(kernel)
    if not k.symmetric:
        raise ValidationError(f"kernel {k.id!r} is not a covariance and cannot define a spline")
    lam = float(lam)
    if not np.isfinite(lam) or lam < 0:
        raise ValidationError(f"lambda must be a non-negative number, got {lam}")
    g = gram(k, data.times)
    pinned = tuple(float(t) for t in data.times[np.diag(g) <= PIN_TOL])
    a = g + lam * np.eye(len(data))
    try:
        spd = SpdMatrix(a, allow_jitter=lam > 0)
    except NumericalError:
        msg = f"Gram matrix of {k.id!r} is singular"
        if pinned:
            msg += f"; every representer vanishes at pinned times {list(pinned)}"
        if lam == 0:
            msg += "; use lambda > 0"
        raise NumericalError(msg) from None
    if pinned:
        warnings.warn(
            f"kernel {k.id!r} forces theta=0 at observation times {list(pinned)}",
            stacklevel=2,
        )
    c = spd.solve(data.values)
    return SplineFit(k.id, lam, data.times.copy(), c, spd.jitter_applied, pinned)


def objective(fit: SplineFit, data: DataSet, coefficients=None) -> float:
    """Penalized criterion of ``theta = sum c_i G(t_i, .)`` on ``data``.

    ``coefficients`` defaults to the fitted ones; passing a perturbed vector
    evaluates a competing candidate in the same span.
    """
    if data.times.shape != fit.times.shape or not np.array_equal(data.times, fit.times):
        raise ValidationError("data times do not match the fit")
    c = fit.coefficients if coefficients is None else np.asarray(coefficients, dtype=float)
    g = gram(fit.kernel, fit.times)
    resid = data.values - g @ c
    return float(resid @ resid + fit.lam * (c @ g @ c))
