"""Regularizers and their proximal operators.

``prox(t, v)`` is always the prox of the *scaled* function ``t * f``,
i.e. the minimizer of ``t f(z) + 0.5 ||z - v||^2``.  All provided
regularizers are separable, so arrays of any shape are handled
elementwise (rows of a 2-D array are independent vectors).
"""

from __future__ import annotations

import numpy as np


class Regularizer:
    name = "abstract"

    def __call__(self, v: np.ndarray) -> float:
        raise NotImplementedError

    def prox(self, t: float, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def F_lambda(self, lam: float, v: np.ndarray) -> np.ndarray:
        """``2 prox_{(lam/2) f}(v / 2)``."""
        return 2.0 * self.prox(0.5 * lam, 0.5 * np.asarray(v, dtype=float))

    def __repr__(self):
        return f"{type(self).__name__}()"


class L1Norm(Regularizer):
    name = "l1"

    def __call__(self, v):
        return float(np.sum(np.abs(v)))

    def prox(self, t, v):
        v = np.asarray(v, dtype=float)
        return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


class SquaredL2(Regularizer):
    """``0.5 ||v||^2``."""

    name = "sq_l2"

    def __call__(self, v):
        return 0.5 * float(np.sum(np.square(v)))

    def prox(self, t, v):
        return np.asarray(v, dtype=float) / (1.0 + t)


class ZeroFunction(Regularizer):
    name = "zero"

    def __call__(self, v):
        return 0.0

    def prox(self, t, v):
        return np.array(v, dtype=float)


REGULARIZERS = {cls.name: cls for cls in (L1Norm, SquaredL2, ZeroFunction)}


def get_regularizer(name: str) -> Regularizer:
    try:
        return REGULARIZERS[name]()
    except KeyError:
        raise ValueError(
            f"unknown regularizer {name!r}; choose from {sorted(REGULARIZERS)}"
        ) from None


def prox(f: Regularizer, t: float, v: np.ndarray) -> np.ndarray:
    if not t > 0:
        raise ValueError(f"prox scale must be positive, got {t}")
    return f.prox(t, v)


def F_lambda(f: Regularizer, lam: float, v: np.ndarray) -> np.ndarray:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return f.F_lambda(lam, v)


def soft_threshold(v: np.ndarray, thresh: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)


def project_l2_ball(center: np.ndarray, radius: float, v: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``v`` onto the ball ``||z - center|| <= radius``."""
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    center = np.asarray(center, dtype=float)
    v = np.asarray(v, dtype=float)
    d = v - center
    nd = np.linalg.norm(d)
    if nd <= radius:
        return v.copy()
    return center + (radius / nd) * d
