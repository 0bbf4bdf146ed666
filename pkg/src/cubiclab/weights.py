"""Smooth compactly supported weights: the bump gamma, the product weight w1, rescalings."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

# 5-point stencils (error O(h^4)) for j <= 2; higher orders use a larger step
FD_STEP = 1e-3
MAX_DERIVATIVE_ORDER = 6


def gamma_bump(x):
    """exp(-1/(1-x^2)) on |x| < 1, zero elsewhere. Accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi * xi))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class WeightFunction:
    """A weight on R^n given by a vectorised evaluator on arrays of shape (..., n)."""

    n: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    name: str = "w"
    derivative_bounds: dict = field(default_factory=dict, compare=False)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise ValueError(f"weight expects points of dimension {self.n}")
        return self.evaluator(x)

    def scaled(self, c: float) -> "WeightFunction":
        """Pointwise multiple c * w (same support)."""
        ev = self.evaluator
        return WeightFunction(self.n, lambda x: c * ev(x), self.support_radius, f"{c}*{self.name}")

    def dilated(self, factor: float) -> "WeightFunction":
        """x -> w(x / factor); the support radius grows by the factor."""
        ev = self.evaluator
        return WeightFunction(
            self.n, lambda x: ev(np.asarray(x) / factor), self.support_radius * factor,
            f"{self.name}(x/{factor})",
        )


def product_weight(n: int) -> WeightFunction:
    """w1(x) = prod_i gamma(x_i), supported in [-1, 1]^n."""
    if n < 1:
        raise ValueError("n must be >= 1")

    def ev(x: np.ndarray) -> np.ndarray:
        return np.prod(gamma_bump(x), axis=-1)

    return WeightFunction(n, ev, 1.0, "w1")


def box_smooth(n: int, radius: float) -> WeightFunction:
    """w1 rescaled to the box [-radius, radius]^n."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    w = product_weight(n).dilated(radius)
    return WeightFunction(n, w.evaluator, radius, f"box-smooth:{radius:g}")


def zero_weight(n: int) -> WeightFunction:
    return WeightFunction(n, lambda x: np.zeros(np.asarray(x).shape[:-1]), 1.0, "zero")


def weight_by_name(spec: str, n: int) -> WeightFunction:
    """Resolve CLI names: ``w1`` or ``box-smooth:<R>``."""
    if spec == "w1":
        return product_weight(n)
    if spec.startswith("box-smooth:"):
        return box_smooth(n, float(spec.split(":", 1)[1]))
    raise ValueError(f"unknown weight {spec!r}")


@lru_cache(maxsize=None)
def central_stencil(order: int, accuracy: int = 4) -> tuple[tuple[int, Fraction], ...]:
    """Exact central finite-difference weights for the given derivative order."""
    half = (order + 1) // 2 - 1 + accuracy // 2
    offsets = list(range(-half, half + 1))
    size = len(offsets)
    # solve sum_k c_k k^m = m! [m == order] for m < size
    A = [[Fraction(k) ** m for k in offsets] for m in range(size)]
    b = [Fraction(math.factorial(order)) if m == order else Fraction(0) for m in range(size)]
    for col in range(size):
        piv = next(r for r in range(col, size) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        b[col], b[piv] = b[piv], b[col]
        for r in range(size):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
                b[r] -= f * b[col]
    coeffs = [b[i] / A[i][i] for i in range(size)]
    return tuple((k, c) for k, c in zip(offsets, coeffs) if c != 0)


def fd_step(order: int) -> float:
    """Step used for a derivative of the given total order."""
    if order <= 2:
        return FD_STEP
    # balance round-off eps/h^j against truncation h^4
    return float(np.finfo(float).eps ** (1.0 / (order + 4)))


def mixed_partial(w: WeightFunction, multi_index: tuple[int, ...], points: np.ndarray, h: float | None = None) -> np.ndarray:
    """Tensor-product central differences of w at an array of points (..., n)."""
    points = np.asarray(points, dtype=float)
    order = sum(multi_index)
    if h is None:
        h = fd_step(order)
    axes = []
    for i, k in enumerate(multi_index):
        if k:
            axes.append([(i, off, float(c)) for off, c in central_stencil(k)])
    if not axes:
        return w(points)
    total = np.zeros(points.shape[:-1])
    for combo in itertools.product(*axes):
        shift = np.zeros(w.n)
        coef = 1.0
        for i, off, c in combo:
            shift[i] += off * h
            coef *= c
        total += coef * w(points + shift)
    return total / h**order


@dataclass(frozen=True)
class DerivativeEstimate:
    order: int
    value: float
    step: float
    grid_points_per_axis: int


def derivative_sup(w: WeightFunction, j: int, grid_per_axis: int | None = None) -> DerivativeEstimate:
    """Estimate R_j(w): sup over mixed partials of total order j of sup |d^j w|.

    Partials come from central difference stencils (4th order accurate) evaluated on a
    uniform grid over [-R(w), R(w)]^n.
    """
    if j < 0:
        raise ValueError("order must be >= 0")
    if j > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"order {j} exceeds the supported stencil depth {MAX_DERIVATIVE_ORDER}")
    if grid_per_axis is None:
        grid_per_axis = max(21, int(round(2e5 ** (1.0 / w.n))) | 1)
    R = w.support_radius
    axis = np.linspace(-R, R, grid_per_axis)
    mesh = np.stack(np.meshgrid(*([axis] * w.n), indexing="ij"), axis=-1)
    best = 0.0
    for mi in itertools.product(range(j + 1), repeat=w.n):
        if sum(mi) != j:
            continue
        vals = mixed_partial(w, mi, mesh)
        best = max(best, float(np.max(np.abs(vals))))
    return DerivativeEstimate(j, best, fd_step(j) if j else 0.0, grid_per_axis)


def weight_metadata(w: WeightFunction, max_order: int = 2) -> dict:
    """Measured R(w) and R_j(w) for j <= max_order (recorded, not enforced)."""
    return {
        "support_radius": w.support_radius,
        "derivative_bounds": [derivative_sup(w, j).value for j in range(max_order + 1)],
    }
