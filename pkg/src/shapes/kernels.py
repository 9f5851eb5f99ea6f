"""
Shape Kernels - Hat and switch functions on the reference interval [-1, 1].
Polynomial kinds are stored as exact numpy Polynomials; the C-infinity bump
is kept only for comparison.
"""
import logging
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad

from src.errors import ShapeError

logger = logging.getLogger(__name__)


class ShapeKind(str, Enum):
    """Reference shapes available for switching and refeed."""

    POLY6_HAT = "poly6_hat"
    INTEGRAL_OF_HAT_SWITCH = "integral_of_hat_switch"
    TWO_INTERVAL_HAT = "two_interval_hat"
    SMOOTH_BUMP = "smooth_bump"
    BOX = "box"

    @property
    def is_hat(self) -> bool:
        return self is not ShapeKind.INTEGRAL_OF_HAT_SWITCH

    @property
    def is_polynomial(self) -> bool:
        return self is not ShapeKind.SMOOTH_BUMP


# (35/32)(1 - x^2)^3 = a(x^6/6 - x^4/2 + x^2/2 - 1/6) with a = -105/16 from the unit integral
_HAT = Polynomial([1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0]) * (35.0 / 32.0)
_HAT_D1 = _HAT.deriv(1)
_HAT_D2 = _HAT.deriv(2)

# psi(x) = integral of the hat from -1; Psi(x) = integral of psi from -1
_SWITCH = _HAT.integ(lbnd=-1.0)
_SWITCH_INT = _SWITCH.integ(lbnd=-1.0)

# psi and its first two derivatives, indexed by order
_SWITCH_DERIVS = (_SWITCH, _HAT, _HAT_D1, _HAT_D2)


def _as_array(x) -> tuple[np.ndarray, bool]:
    """Return x as a float array and whether it was a scalar."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"Reference coordinate must be finite, got {x!r}")
    return arr, arr.ndim == 0


def _out(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def _check_order(order: int) -> None:
    if order not in (1, 2):
        raise ShapeError(f"Derivative order must be 1 or 2, got {order!r}")


def _bump(x: np.ndarray) -> np.ndarray:
    flat = np.atleast_1d(x)
    inside = np.abs(flat) < 1.0
    out = np.zeros_like(flat)
    xi = flat[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi * xi))
    return out.reshape(x.shape)


@lru_cache(maxsize=1)
def smooth_bump_mass() -> float:
    """Integral of the unnormalized bump over [-1, 1]."""
    mass, _ = quad(lambda s: float(np.exp(-1.0 / (1.0 - s * s))), -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    logger.debug(f"Smooth bump mass: {mass:.15g}")
    return mass


def _two_interval(x: np.ndarray, order: int) -> np.ndarray:
    """k-th derivative of the two-interval hat (k = 0 gives the value)."""
    poly = _SWITCH_DERIVS[order]
    left = (2.0 ** order) * poly(2.0 * x + 1.0)
    right = ((-2.0) ** order) * poly(1.0 - 2.0 * x)
    out = np.where(x < 0.0, left, right)
    return np.where(np.abs(x) <= 1.0, out, 0.0)


def hat_eval(kind: ShapeKind, x):
    """
    Evaluate a reference hat.

    Args:
        kind: A hat kind.
        x: Reference coordinate (scalar or array).

    Returns:
        Hat value, 0 outside [-1, 1].
    """
    kind = ShapeKind(kind)
    if not kind.is_hat:
        raise ShapeError(f"{kind.value} is not a hat kind")
    arr, scalar = _as_array(x)
    inside = np.abs(arr) <= 1.0

    if kind is ShapeKind.POLY6_HAT:
        values = np.where(inside, _HAT(arr), 0.0)
    elif kind is ShapeKind.TWO_INTERVAL_HAT:
        values = _two_interval(arr, 0)
    elif kind is ShapeKind.BOX:
        values = np.where((arr >= -1.0) & (arr < 1.0), 0.5, 0.0)
    else:
        values = _bump(arr)
    return _out(values, scalar)


def switch_eval(x):
    """
    Evaluate the integral-of-hat switch psi.

    Args:
        x: Reference coordinate (scalar or array).

    Returns:
        0 for x <= -1, 1 for x >= 1, the degree-7 polynomial in between.
    """
    arr, scalar = _as_array(x)
    values = np.where(arr <= -1.0, 0.0, np.where(arr >= 1.0, 1.0, _SWITCH(np.clip(arr, -1.0, 1.0))))
    return _out(values, scalar)


def shape_derivative(kind: ShapeKind, x, order: int):
    """
    Closed-form derivative of a polynomial reference shape.

    Args:
        kind: Any polynomial kind (the switch included).
        x: Reference coordinate (scalar or array).
        order: 1 or 2.

    Returns:
        The derivative, 0 outside the support.
    """
    kind = ShapeKind(kind)
    _check_order(order)
    if not kind.is_polynomial:
        raise ShapeError("Smooth bump has no closed-form derivatives")
    arr, scalar = _as_array(x)
    inside = np.abs(arr) <= 1.0

    if kind is ShapeKind.POLY6_HAT:
        values = np.where(inside, (_HAT_D1, _HAT_D2)[order - 1](arr), 0.0)
    elif kind is ShapeKind.INTEGRAL_OF_HAT_SWITCH:
        values = np.where(inside, _SWITCH_DERIVS[order](arr), 0.0)
    elif kind is ShapeKind.TWO_INTERVAL_HAT:
        values = _two_interval(arr, order)
    else:
        values = np.zeros_like(arr)
    return _out(values, scalar)


def hat_cumulative(kind: ShapeKind, x):
    """
    Integral of a reference hat from -1 to x.

    Returns:
        0 below the support, the unnormalized mass above it (1 for every
        polynomial kind).
    """
    kind = ShapeKind(kind)
    if not kind.is_hat:
        raise ShapeError(f"{kind.value} is not a hat kind")
    arr, scalar = _as_array(x)
    xc = np.clip(arr, -1.0, 1.0)

    if kind is ShapeKind.POLY6_HAT:
        values = _SWITCH(xc)
    elif kind is ShapeKind.TWO_INTERVAL_HAT:
        values = np.where(xc < 0.0, 0.5 * _SWITCH_INT(2.0 * xc + 1.0), 1.0 - 0.5 * _SWITCH_INT(1.0 - 2.0 * xc))
    elif kind is ShapeKind.BOX:
        values = 0.5 * (xc + 1.0)
    else:
        values = np.vectorize(_bump_cumulative, otypes=[float])(xc)
    values = np.where(arr <= -1.0, 0.0, values)
    return _out(values, scalar)


def _bump_cumulative(x: float) -> float:
    if x <= -1.0:
        return 0.0
    if x >= 1.0:
        return smooth_bump_mass()
    value, _ = quad(lambda s: float(np.exp(-1.0 / (1.0 - s * s))), -1.0, x, epsabs=1e-14, epsrel=1e-13)
    return value


def switch_cumulative(x):
    """Integral of psi from -1 to x; grows linearly past x = 1."""
    arr, scalar = _as_array(x)
    xc = np.clip(arr, -1.0, 1.0)
    values = _SWITCH_INT(xc) + np.maximum(arr - 1.0, 0.0)
    values = np.where(arr <= -1.0, 0.0, values)
    return _out(values, scalar)


def switch_polynomial() -> Polynomial:
    """Return psi as a Polynomial in the reference coordinate (valid on [-1, 1])."""
    return _SWITCH.copy()


if __name__ == "__main__":
    # Quick test
    print(f"hat(0)    = {hat_eval(ShapeKind.POLY6_HAT, 0.0)}")
    print(f"hat(-0.5) = {hat_eval(ShapeKind.POLY6_HAT, -0.5)}")
    print(f"psi(0)    = {switch_eval(0.0)}")
    print(f"two(0)    = {hat_eval(ShapeKind.TWO_INTERVAL_HAT, 0.0)}")
    print(f"bump mass = {smooth_bump_mass()}")
