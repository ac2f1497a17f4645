"""Hot scalar kernels.

The multiplier search below runs once per node per round, so it is
compiled with numba when available.  Set ``NETDR_DISABLE_NUMBA=1`` to
run the same source as plain numpy/Python instead.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("NETDR_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
except ImportError:
    njit = None

USE_NUMBA = njit is not None


def _ball_multiplier(s2, ghat2, gperp_sq, w_a, w_b, delta, has_alpha, tol, max_iter):
    """Root ``mu >= 0`` of ``||r(mu)|| = delta``.

    With ``t = w_a / (w_a + mu)`` and ``kappa = mu t`` (or ``t = 1``,
    ``kappa = mu`` without an alpha block) the residual obeys
    ``||r||^2 = t^2 (||g_perp||^2 + sum_i h_i^2 ghat_i^2)``,
    ``h_i = w_b / (w_b + kappa s_i^2)``, which decreases in ``mu``.
    Newton steps are taken on ``1/||r|| - 1/delta`` (nearly linear in
    ``mu``) inside a bisection bracket.  Returns ``(mu, ||r||, iterations)``.
    """
    lo = 0.0
    hi = np.inf
    mu = 0.0
    it = 0
    while True:
        if has_alpha:
            t = w_a / (w_a + mu)
            dt = -t * t / w_a
            dkappa = t * t
            kappa = mu * t
        else:
            t = 1.0
            dt = 0.0
            dkappa = 1.0
            kappa = mu
        h = w_b / (w_b + kappa * s2)
        q = gperp_sq + np.sum(h * h * ghat2)
        dq = -2.0 * dkappa * np.sum(h * h * h * s2 * ghat2) / w_b
        r = t * np.sqrt(q)
        dr = (2.0 * t * dt * q + t * t * dq) / (2.0 * r) if r > 0.0 else 0.0

        if it == 0 and r <= delta:
            return 0.0, r, 0
        if abs(r - delta) <= tol or it >= max_iter:
            return mu, r, it
        if r > delta:
            lo = mu
        else:
            hi = mu
        if hi < np.inf and hi - lo <= 4e-16 * hi:
            return mu, r, it

        if dr < 0.0:
            # psi = 1/r - 1/delta, psi' = -dr / r^2
            cand = mu + (1.0 / r - 1.0 / delta) * r * r / dr
        else:
            cand = np.inf
        if not (lo < cand < hi):
            if hi == np.inf:
                cand = max(4.0 * mu, 1.0)
            else:
                cand = 0.5 * (lo + hi)
        mu = cand
        it += 1


if USE_NUMBA:
    _ball_multiplier_fast = njit(cache=True, nogil=True)(_ball_multiplier)
else:
    _ball_multiplier_fast = _ball_multiplier


def _prep(s2, ghat2, gperp_sq, w_a, w_b, delta, has_alpha, tol, max_iter):
    if tol is None:
        tol = 1e-12 * max(1.0, delta)
    return (
        np.ascontiguousarray(s2, dtype=np.float64),
        np.ascontiguousarray(ghat2, dtype=np.float64),
        float(gperp_sq),
        float(w_a),
        float(w_b),
        float(delta),
        bool(has_alpha),
        float(tol),
        int(max_iter),
    )


def ball_multiplier(s2, ghat2, gperp_sq, w_a, w_b, delta, has_alpha, tol=None, max_iter=200):
    """Multiplier for the ball-constrained weighted projection (compiled if enabled)."""
    return _ball_multiplier_fast(*_prep(s2, ghat2, gperp_sq, w_a, w_b, delta, has_alpha, tol, max_iter))


def ball_multiplier_numpy(s2, ghat2, gperp_sq, w_a, w_b, delta, has_alpha, tol=None, max_iter=200):
    """Same kernel, never compiled."""
    return _ball_multiplier(*_prep(s2, ghat2, gperp_sq, w_a, w_b, delta, has_alpha, tol, max_iter))
