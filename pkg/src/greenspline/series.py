"""Fourier-series construction of Green's functions, used as an oracle that is
independent of the closed forms in :mod:`greenspline.kernels`.

On zero-mean functions the Laplace operator acts diagonally on the basis
``cos(2 i pi t), sin(2 i pi t)`` with eigenvalue ``4 i^2 pi^2``, so the Green's
function is the series

    sum_i (cos(2 i pi s) cos(2 i pi t) + sin(2 i pi s) sin(2 i pi t)) / (2 i^2 pi^2)

and subspace constraints become statements about which basis functions are
kept or modified. Truncating at order ``N`` leaves a tail bounded by
``K / N`` in sup norm, where ``K`` depends only on the mode; see
:func:`tail_bound`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, ValidationError
from .kernels import Kernel, get_kernel
from .numerics import _evaluate, simpson, simpson_weights

MODES = ("unconstrained", "dirichlet_basis", "sine_only", "zero_indices", "linear_constraint")

DEFAULT_N = 10_000
DEFAULT_PANELS = 4096
_CHUNK = 1024

#: Closed-form catalog entries paired with the series mode that reproduces them.
SERIES_FOR_KERNEL = {
    "dirichlet": "dirichlet_basis",
    "balanced_periodic": "unconstrained",
    "odd": "sine_only",
}


@dataclass(frozen=True)
class SeriesSpec:
    """Truncated, constrained Fourier representation of a Green's function.

    ``zero_indices`` lists cosine indices whose coefficient is forced to zero
    (only used by mode ``zero_indices``). ``weights`` holds ``c_1..c_N`` of the
    linear constraint ``sum c_i a_i = 0`` (mode ``linear_constraint``); missing
    trailing weights are zero.
    """

    n: int = DEFAULT_N
    mode: str = "unconstrained"
    zero_indices: tuple[int, ...] = ()
    weights: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValidationError(f"truncation order must be >= 1, got {self.n}")
        if self.mode not in MODES:
            raise ValidationError(f"unknown series mode {self.mode!r}; choose one of {', '.join(MODES)}")
        bad = [i for i in self.zero_indices if not 1 <= i <= self.n]
        if bad:
            raise ValidationError(f"zero indices {bad} outside 1..{self.n}")
        if len(self.weights) > self.n or not np.all(np.isfinite(self.weights)):
            raise ValidationError("linear-constraint weights must be finite and at most N long")


@dataclass(frozen=True)
class FourierCoeffs:
    a0: float
    a: np.ndarray
    b: np.ndarray

    def __call__(self, t) -> np.ndarray:
        """Evaluate the truncated Fourier series at ``t``."""
        t = np.asarray(t, dtype=float)
        i = np.arange(1, len(self.a) + 1)
        arg = 2.0 * np.pi * np.multiply.outer(t, i)
        return 0.5 * self.a0 + np.cos(arg) @ self.a + np.sin(arg) @ self.b


def cosine_series_closed(u):
    """Closed form ``(u (u - 1) + 1/6) / 4`` of ``sum cos(2 i pi u) / (4 i^2 pi^2)``."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("u must lie in [0, 1]")
    out = 0.25 * (arr * (arr - 1.0) + 1.0 / 6.0)
    return float(out) if out.ndim == 0 else out


def cosine_partial_sum(u, n: int):
    """Partial sum ``sum_{i=1}^{n} cos(2 i pi u) / (4 i^2 pi^2)``."""
    arr = np.asarray(u, dtype=float)
    flat = arr.reshape(-1)
    total = np.zeros_like(flat)
    for lo in range(1, n + 1, _CHUNK):
        i = np.arange(lo, min(lo + _CHUNK, n + 1), dtype=float)
        total += np.cos(2.0 * np.pi * np.multiply.outer(flat, i)) @ (1.0 / (4.0 * i * i * np.pi**2))
    out = total.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def _cos_weights(spec: SeriesSpec, i: np.ndarray) -> np.ndarray:
    """Multiplier on the ``cos cos`` product for each index in ``i``."""
    if spec.mode == "sine_only":
        return np.zeros_like(i, dtype=float)
    if spec.mode == "zero_indices":
        return np.where(np.isin(i, spec.zero_indices), 0.0, 1.0)
    if spec.mode == "linear_constraint":
        c = np.zeros(spec.n + 1)
        c[1 : len(spec.weights) + 1] = spec.weights
        return 1.0 - c[i]
    return np.ones_like(i, dtype=float)


def truncated_green(spec: SeriesSpec, s, t):
    """Order-``N`` partial sum of the Green's function series for ``spec.mode``.

    ``dirichlet_basis`` replaces each ``cos(2 i pi .)`` by ``cos(2 i pi .) - 1``;
    ``linear_constraint`` subtracts the compensating term
    ``sum c_i cos(2 i pi s) cos(2 i pi t) / (2 i^2 pi^2)``.
    """
    s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    for x, name in ((s, "s"), (t, "t")):
        if x.size and (x.min() < 0.0 or x.max() > 1.0):
            raise DomainError(f"{name} must lie in [0, 1]")
    fs, ft = s.reshape(-1), t.reshape(-1)
    total = np.zeros_like(fs)
    for lo in range(1, spec.n + 1, _CHUNK):
        i = np.arange(lo, min(lo + _CHUNK, spec.n + 1))
        w = 1.0 / (2.0 * np.pi**2 * i.astype(float) ** 2)
        a_s = 2.0 * np.pi * np.multiply.outer(fs, i)
        a_t = 2.0 * np.pi * np.multiply.outer(ft, i)
        sin_part = np.sin(a_s) * np.sin(a_t)
        if spec.mode == "dirichlet_basis":
            cos_part = (np.cos(a_s) - 1.0) * (np.cos(a_t) - 1.0)
        else:
            cos_part = np.cos(a_s) * np.cos(a_t) * _cos_weights(spec, i)
        total += (cos_part + sin_part) @ w
    out = total.reshape(s.shape)
    return float(out) if out.ndim == 0 else out


def tail_bound(spec: SeriesSpec) -> float:
    """Sup-norm bound ``K / N`` on the truncation error of :func:`truncated_green`.

    Each term is at most ``m / (2 i^2 pi^2)`` in absolute value, with ``m = 4``
    for the Dirichlet basis and ``m = 1`` otherwise (beyond ``N`` the linear
    constraint weights are zero), and ``sum_{i > N} i^-2 <= 1 / N``.
    """
    m = 4.0 if spec.mode == "dirichlet_basis" else 1.0
    return m / (2.0 * np.pi**2 * spec.n)


def fourier_coeffs(f: Callable, n: int, panels: int = DEFAULT_PANELS) -> FourierCoeffs:
    """Fourier coefficients ``a_0, a_1..a_n, b_1..b_n`` of ``f`` on ``[0, 1]``
    by composite Simpson with ``panels`` subintervals."""
    if n < 1:
        raise ValidationError(f"order must be >= 1, got {n}")
    x, w = simpson_weights(0.0, 1.0, panels)
    wf = 2.0 * w * _evaluate(f, x)
    a = np.empty(n)
    b = np.empty(n)
    for lo in range(1, n + 1, _CHUNK):
        i = np.arange(lo, min(lo + _CHUNK, n + 1))
        arg = 2.0 * np.pi * np.multiply.outer(i, x)
        a[lo - 1 : i[-1]] = np.cos(arg) @ wf
        b[lo - 1 : i[-1]] = np.sin(arg) @ wf
    return FourierCoeffs(float(wf.sum()), a, b)


def _apply_series(spec: SeriesSpec, h: Callable, t: np.ndarray, panels: int) -> np.ndarray:
    # Integrate the series term by term against h: each basis product
    # contributes (its coefficient of h) * (basis at t).
    if panels < 4 * spec.n:
        raise ValidationError(
            f"{panels} panels cannot resolve series order {spec.n}; need at least {4 * spec.n}"
        )
    c = fourier_coeffs(h, spec.n, panels)
    i = np.arange(1, spec.n + 1)
    w = 1.0 / (2.0 * np.pi**2 * i.astype(float) ** 2)
    arg = 2.0 * np.pi * np.multiply.outer(t, i)
    if spec.mode == "dirichlet_basis":
        cos_term = (np.cos(arg) - 1.0) @ (w * 0.5 * (c.a - c.a0))
    else:
        cos_term = np.cos(arg) @ (w * 0.5 * c.a * _cos_weights(spec, i))
    return cos_term + np.sin(arg) @ (w * 0.5 * c.b)


def apply_kernel(kernel, h: Callable, t, panels: int = 2048):
    """``int_0^1 G(s, t) h(s) ds`` for a catalog kernel or a :class:`SeriesSpec`.

    For catalog kernels the integral is split at every kink of ``G(., t)``
    (``s = t``, plus ``s = 1 - t`` for ``odd``) and each piece gets ``panels``
    Simpson subintervals. For a series the integral is taken term by term
    from the Fourier coefficients of ``h``.
    """
    arr = np.asarray(t, dtype=float)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise DomainError("t must lie in [0, 1]")
    if panels < 2:
        raise ValidationError(f"need at least 2 panels, got {panels}")
    flat = arr.reshape(-1)
    if isinstance(kernel, SeriesSpec):
        out = _apply_series(kernel, h, flat, panels)
    else:
        k: Kernel = get_kernel(kernel)
        out = np.array([
            simpson(lambda s, ti=ti: k(s, ti) * _evaluate(h, s), 0.0, 1.0, panels, k.kinks(ti))
            for ti in flat
        ])
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out
