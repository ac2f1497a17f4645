"""Weighted projection onto ``{(beta, alpha): ||X beta - y + alpha|| <= delta}``.

Solves

    min  w_a ||alpha - c||^2 + w_b ||beta - d||^2
    s.t. ||X beta - y + alpha||_2 <= delta

(or the same problem with no ``alpha`` block).  The SVD of ``X`` is
computed once; each solve is then a scalar root search for the KKT
multiplier plus two thin matrix-vector products.
"""

from __future__ import annotations

import numpy as np

from . import _kernels


class InfeasibleConstraint(ValueError):
    pass


class BallConstraint:
    def __init__(self, X: np.ndarray, y: np.ndarray, delta: float):
        if delta < 0:
            raise ValueError(f"radius must be nonnegative, got {delta}")
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.delta = float(delta)
        self.U, self.s, self.Vt = np.linalg.svd(self.X, full_matrices=False)
        self.s2 = self.s * self.s
        tiny = self.s[0] * max(self.X.shape) * np.finfo(float).eps if self.s.size else 0.0
        self.null = self.s <= tiny
        self.last_iterations = 0

    def residual(self, beta, alpha=None) -> float:
        r = self.X @ beta - self.y
        if alpha is not None:
            r = r + alpha
        return float(np.linalg.norm(r))

    def project(self, d, c=None, w_a=1.0, w_b=1.0, kernel=None):
        """Return ``(beta, alpha)``; ``alpha`` is ``None`` when ``c`` is ``None``."""
        has_alpha = c is not None
        d = np.asarray(d, dtype=float)
        g = self.y - self.X @ d
        if has_alpha:
            g = g - c
        ghat = self.U.T @ g
        gperp = g - self.U @ ghat
        gperp_sq = float(gperp @ gperp)
        if float(g @ g) <= self.delta**2:
            self.last_iterations = 0
            return d.copy(), (np.array(c, dtype=float) if has_alpha else None)
        if not has_alpha:
            floor = np.sqrt(gperp_sq + float(np.sum(ghat[self.null] ** 2)))
            if floor >= self.delta:
                raise InfeasibleConstraint(
                    f"least-squares residual {floor:.3e} exceeds radius {self.delta:.3e}"
                )

        solve = kernel or _kernels.ball_multiplier
        mu, _, self.last_iterations = solve(
            self.s2, ghat * ghat, gperp_sq, w_a, w_b, self.delta, has_alpha
        )
        kappa = mu * w_a / (w_a + mu) if has_alpha else mu
        beta = d + self.Vt.T @ (kappa * self.s / (w_b + kappa * self.s2) * ghat)
        if not has_alpha:
            return beta, None
        alpha = (w_a * c - mu * (self.X @ beta - self.y)) / (w_a + mu)
        return beta, alpha
