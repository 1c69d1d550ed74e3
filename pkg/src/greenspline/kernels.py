"""Closed-form Green's functions of the Laplace operator ``f -> -f''`` on
constrained subspaces of C^2([0, 1]).

Each catalog entry is a :class:`Kernel`: a vectorized formula ``G(s, t)``, the
subspace constraints every row ``G(s, .)`` must satisfy, and the off-diagonal
compensation density ``-d^2/dt^2 G(s, t)`` (away from the kinks). The density
is the smooth part of how the point evaluation at ``s`` is represented inside
the subspace: zero for plain boundary conditions, a constant in ``t`` when a
zero-mean or polynomial restriction is added.

>>> from greenspline.kernels import get_kernel, gram
>>> get_kernel("dirichlet").eval(0.25, 0.5)
0.125
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .errors import DomainError, ValidationError
from .numerics import second_difference, simpson

# one-sided stencil step for derivative pins
DERIVATIVE_STEP = 1e-5
QUADRATURE_PANELS = 64


@dataclass(frozen=True)
class Constraint:
    """A subspace condition imposed on every row ``t -> G(s, t)``.

    ``kind`` is one of ``value`` (``G(s, at) = 0``), ``derivative``
    (``d/dt G(s, at) = 0``), ``zero_integral``, ``periodic``
    (``G(s, 0) = G(s, 1)``) or ``odd`` (``G(s, t) = -G(s, 1 - t)``).
    """

    kind: str
    at: float | None = None

    def __str__(self) -> str:
        if self.kind == "value":
            return f"G(s,{self.at:g})=0"
        if self.kind == "derivative":
            return f"dG/dt(s,{self.at:g})=0"
        return {
            "zero_integral": "int_0^1 G(s,t)dt=0",
            "periodic": "G(s,0)=G(s,1)",
            "odd": "G(s,t)=-G(s,1-t)",
        }[self.kind]


@dataclass(frozen=True)
class Kernel:
    """Catalog entry pairing a closed form with its declared constraints."""

    id: str
    formula: str
    func: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False)
    constraints: tuple[Constraint, ...]
    compensation: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    compensation_formula: str
    symmetric: bool = True
    antidiagonal_kink: bool = False
    description: str = ""

    def __call__(self, s, t) -> np.ndarray:
        """Vectorized evaluation without domain checks."""
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        return np.asarray(self.func(s, t), dtype=float)

    def eval(self, s, t):
        """Evaluate ``G(s, t)``; scalars in give a float out.

        Raises
        ------
        DomainError
            If ``s`` or ``t`` lies outside ``[0, 1]``.
        """
        _check_unit(s, "s")
        _check_unit(t, "t")
        out = self(s, t)
        return float(out) if out.ndim == 0 else out

    def kinks(self, s: float) -> tuple[float, ...]:
        """Points in ``t`` where the row ``G(s, .)`` is not smooth (may
        include the endpoints 0 and 1)."""
        pts = {float(s)}
        if self.antidiagonal_kink:
            pts.add(1.0 - float(s))
        return tuple(sorted(pts))

    def matrix(self, a, b) -> np.ndarray:
        """Cross-covariance matrix ``[G(a_i, b_j)]`` for arbitrary point sets."""
        a = np.asarray(a, dtype=float).reshape(-1)
        b = np.asarray(b, dtype=float).reshape(-1)
        _check_unit(a, "a")
        _check_unit(b, "b")
        return self(a[:, None], b[None, :])


def _check_unit(x, name: str) -> None:
    x = np.asarray(x, dtype=float)
    if x.size and (not np.all(np.isfinite(x)) or x.min() < 0.0 or x.max() > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")


def _zero(s):
    return np.zeros_like(np.asarray(s, dtype=float))


# --- closed forms --------------------------------------------------------------


def _dirichlet(s, t):
    return np.minimum(s, t) - s * t


def _mixed(s, t):
    return np.minimum(s, t)


def _balanced_periodic(s, t):
    d = np.abs(s - t)
    return 0.5 * d * d - 0.5 * d + 1.0 / 12.0


def _odd(s, t):
    d = np.abs(s - t)
    u = s + t
    u = u - (u >= 1.0)
    return 0.25 * (d * (d - 1.0) - u * (u - 1.0))


def _mixed_zero_mean(s, t):
    return np.minimum(s, t) - 0.75 * (s * s - 2.0 * s) * (t * t - 2.0 * t)


def _dirichlet_zero_mean(s, t):
    return np.minimum(s, t) - s * t - 3.0 * (1.0 - s) * s * (1.0 - t) * t


def _poly2_mixed(s, t):
    return 0.75 * (s - 2.0) * s * (t - 2.0) * t


def _poly2_bridge(s, t):
    return 3.0 * s * (1.0 - s) * t * (1.0 - t)


def _heaviside(s, t):
    return (t >= s).astype(float)


_V0 = Constraint("value", 0.0)
_V1 = Constraint("value", 1.0)
_D1 = Constraint("derivative", 1.0)
_INT = Constraint("zero_integral")

CATALOG: dict[str, Kernel] = {
    k.id: k
    for k in [
        Kernel(
            "dirichlet", "min(s,t) - s*t", _dirichlet, (_V0, _V1),
            _zero, "0",
            description="homogeneous Dirichlet; Brownian bridge covariance",
        ),
        Kernel(
            "mixed", "min(s,t)", _mixed, (_V0, _D1),
            _zero, "0",
            description="f(0)=f'(1)=0; Brownian motion covariance",
        ),
        Kernel(
            "balanced_periodic", "|s-t|^2/2 - |s-t|/2 + 1/12", _balanced_periodic,
            (_INT, Constraint("periodic")),
            lambda s: np.full_like(np.asarray(s, dtype=float), -1.0), "-1",
            description="zero mean and f(0)=f(1); periodic Brownian motion",
        ),
        Kernel(
            "odd", "(|s-t|(|s-t|-1) - u(u-1))/4, u = s+t-1[s+t>=1]", _odd,
            (Constraint("odd"), _V0, _V1, _INT),
            _zero, "0",
            antidiagonal_kink=True,
            description="f(t) = -f(1-t)",
        ),
        Kernel(
            "mixed_zero_mean", "min(s,t) - 3/4 (s^2-2s)(t^2-2t)", _mixed_zero_mean,
            (_V0, _D1, _INT),
            lambda s: 1.5 * (s * s - 2.0 * s), "3/2 (s^2 - 2s)",
            description="f(0)=f'(1)=0 and zero mean",
        ),
        Kernel(
            "dirichlet_zero_mean", "min(s,t) - s*t - 3(1-s)s(1-t)t", _dirichlet_zero_mean,
            (_V0, _V1, _INT),
            lambda s: -6.0 * s * (1.0 - s), "-6 s (1 - s)",
            description="f(0)=f(1)=0 and zero mean",
        ),
        Kernel(
            "poly2_mixed", "3/4 (s-2)s(t-2)t", _poly2_mixed, (_V0, _D1),
            lambda s: -1.5 * (s * s - 2.0 * s), "-3/2 (s^2 - 2s)",
            description="quadratic polynomials with f(0)=f'(1)=0",
        ),
        Kernel(
            "poly2_bridge", "3 s(1-s) t(1-t)", _poly2_bridge, (_V0, _V1),
            lambda s: 6.0 * s * (1.0 - s), "6 s (1 - s)",
            description="quadratic polynomials with f(0)=f(1)=0",
        ),
        Kernel(
            "heaviside_first_order", "1[s,1](t)", _heaviside, (),
            _zero, "0",
            symmetric=False,
            description="Green's function of d/dt; not a covariance",
        ),
    ]
}

#: Catalog ids usable as covariances and smoothing-spline kernels.
SYMMETRIC_IDS = tuple(k for k, v in CATALOG.items() if v.symmetric)


def get_kernel(kernel) -> Kernel:
    """Look up a catalog entry by id (a :class:`Kernel` passes through)."""
    if isinstance(kernel, Kernel):
        return kernel
    try:
        return CATALOG[kernel]
    except KeyError:
        raise ValidationError(
            f"unknown kernel {kernel!r}; choose one of {', '.join(CATALOG)}"
        ) from None


def validate_times(times, name: str = "times") -> np.ndarray:
    """Return ``times`` as a float array after checking it is strictly
    increasing, finite and inside ``[0, 1]``."""
    t = np.asarray(times, dtype=float).reshape(-1)
    if not np.all(np.isfinite(t)):
        raise ValidationError(f"{name} must be finite")
    _check_unit(t, name)
    if t.size > 1:
        dt = np.diff(t)
        if np.any(dt == 0):
            raise ValidationError(f"{name} contain duplicates at {t[1:][dt == 0].tolist()}")
        if np.any(dt < 0):
            raise ValidationError(f"{name} must be sorted increasingly")
    return t


def gram(kernel, times) -> np.ndarray:
    """Gram matrix ``[G(t_i, t_j)]`` for strictly increasing ``times``.

    The upper triangle is computed and mirrored, so the result is exactly
    symmetric.
    """
    k = get_kernel(kernel)
    t = validate_times(times)
    full = k(t[:, None], t[None, :])
    upper = np.triu(full)
    return upper + np.triu(full, 1).T


@dataclass(frozen=True)
class ConstraintReport:
    kernel: str
    residuals: dict[str, float]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def __str__(self) -> str:
        lines = [f"{self.kernel}: max residual {self.max_residual:.3e}"]
        lines += [f"  {name}: {r:.3e}" for name, r in self.residuals.items()]
        return "\n".join(lines)


def probe_points(count: int) -> np.ndarray:
    """Deterministic low-discrepancy points in ``[0, 1)`` (van der Corput)."""
    if count < 1:
        raise ValidationError(f"probe count must be positive, got {count}")
    return qmc.Halton(d=1, scramble=False).random(count)[:, 0]


def _one_sided_derivative(row: Callable, at: float, h: float) -> float:
    if at >= 1.0:
        return (3.0 * row(at) - 4.0 * row(at - h) + row(at - 2.0 * h)) / (2.0 * h)
    return (-3.0 * row(at) + 4.0 * row(at + h) - row(at + 2.0 * h)) / (2.0 * h)


def check_constraints(kernel, probe_count: int = 100) -> ConstraintReport:
    """Evaluate every declared constraint on ``probe_count`` rows ``G(s, .)``.

    Value pins are evaluated exactly, derivative pins with a second-order
    one-sided difference (step ``1e-5``) and integrals with Simpson split at
    the row's kinks. Each residual is the maximum absolute violation over the
    probes.
    """
    k = get_kernel(kernel)
    probes = probe_points(probe_count)
    residuals: dict[str, float] = {}
    for c in k.constraints:
        worst = 0.0
        for s in probes:
            def row(t, s=s):
                return k(s, t)

            if c.kind == "value":
                r = abs(float(row(c.at)))
            elif c.kind == "derivative":
                r = abs(_one_sided_derivative(row, c.at, DERIVATIVE_STEP))
            elif c.kind == "zero_integral":
                r = abs(simpson(row, 0.0, 1.0, QUADRATURE_PANELS, k.kinks(s)))
            elif c.kind == "periodic":
                r = abs(float(row(0.0) - row(1.0)))
            elif c.kind == "odd":
                r = float(np.max(np.abs(row(probes) + row(1.0 - probes))))
            else:  # pragma: no cover - catalog is closed
                raise ValidationError(f"unknown constraint kind {c.kind!r}")
            worst = max(worst, r)
        residuals[str(c)] = worst
    return ConstraintReport(k.id, residuals)


def offdiag_laplacian_check(kernel, s: float, t: float, step: float = 1e-4) -> float:
    """Central second difference of ``G(s, .)`` at ``t`` minus the kernel's
    compensation density at ``s``; near zero when the closed form is right."""
    k = get_kernel(kernel)
    if step <= 0:
        raise ValidationError(f"step must be positive, got {step}")
    if not (0.0 < s < 1.0 and step < t < 1.0 - step):
        raise DomainError("s and the stencil around t must be interior to (0, 1)")
    for kink in [s, 1.0 - s] if k.antidiagonal_kink else [s]:
        if abs(t - kink) <= 2.0 * step:
            raise ValidationError(f"probe t={t} is within 2*step of the kink at {kink}")
    lap = second_difference(lambda x: float(k(s, x)), t, step)
    return lap - float(k.compensation(s))
