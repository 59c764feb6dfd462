"""Residual-energy power-law fits and time-step convergence diagnostics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import FitIllPosed

BRACKET_WIDTH = 0.5
BRACKET_REL_GAP = 1e-9
XTOL = 1e-10
N_SCAN = 400


@dataclass(frozen=True)
class PowerLawFit:
    """``epsilon(tau) ~ epsilon_inf + amplitude * tau**(-alpha)``."""

    epsilon_inf: float
    amplitude: float
    alpha: float
    rss: float
    n_points: int
    tau_min: float
    tau_max: float
    at_bracket_edge: bool = False

    def predict(self, tau):
        return self.epsilon_inf + self.amplitude * np.asarray(tau, dtype=float) ** (-self.alpha)

    def to_json(self) -> dict:
        out = asdict(self)
        out.pop("at_bracket_edge")
        return out


def _loglog_ols(log_tau, eps, eps_inf):
    y = np.log(eps - eps_inf)
    A = np.column_stack([np.ones_like(log_tau), log_tau])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(resid @ resid), coef


def fit_power_law(points: Iterable[Sequence[float]], min_points: int = 4,
                  tau_min: float | None = None, tau_max: float | None = None) -> PowerLawFit:
    """Profile fit over ``epsilon_inf`` with a log-log regression at each candidate.

    ``points`` are ``(tau, epsilon)`` pairs with strictly increasing ``tau``.
    The optional window keeps only ``tau_min <= tau <= tau_max``.  The
    profile objective (log-space RSS) is scanned on a grid over the bracket
    ``[min(eps) - 0.5, min(eps) - 1e-9 |min(eps)|]`` and the best cell is
    refined with a bounded scalar minimiser to ``1e-10``.
    """
    pts = np.asarray([tuple(p) for p in points], dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (tau, epsilon) pairs")
    if tau_min is not None:
        pts = pts[pts[:, 0] >= tau_min]
    if tau_max is not None:
        pts = pts[pts[:, 0] <= tau_max]
    if min_points < 4:
        raise ValueError("min_points must be >= 4 (three parameters plus one residual)")
    if len(pts) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(pts)}")
    tau, eps = pts[:, 0], pts[:, 1]
    if np.any(tau <= 0) or np.any(np.diff(tau) <= 0):
        raise ValueError("taus must be positive and strictly increasing")
    if not np.all(np.isfinite(eps)):
        raise ValueError("energies must be finite")
    if np.ptp(eps) == 0:
        raise FitIllPosed("all energies are equal; no decay to fit")

    log_tau = np.log(tau)
    e_min = float(eps.min())
    lo = e_min - BRACKET_WIDTH
    hi = e_min - BRACKET_REL_GAP * max(abs(e_min), 1.0)

    def objective(e_inf):
        return _loglog_ols(log_tau, eps, e_inf)[0]

    # the profile blows up logarithmically at the upper end, so scan the gap
    # below min(eps) on a log scale before refining locally
    gaps = np.geomspace(e_min - lo, e_min - hi, N_SCAN)
    cand = e_min - gaps
    vals = np.array([objective(c) for c in cand])
    i = int(np.argmin(vals))
    left = cand[max(i - 1, 0)]
    right = cand[min(i + 1, N_SCAN - 1)]
    res = minimize_scalar(objective, bounds=(left, right), method="bounded",
                          options={"xatol": XTOL, "maxiter": 500})
    e_inf = float(res.x) if res.fun <= vals[i] else float(cand[i])
    rss, (intercept, slope) = _loglog_ols(log_tau, eps, e_inf)
    alpha = -float(slope)
    if not alpha > 0:
        raise FitIllPosed(f"energies do not decay with tau (fitted alpha={alpha:.3g})")
    edge = i == 0 or i == N_SCAN - 1
    return PowerLawFit(e_inf, math.exp(intercept), alpha, rss, len(tau),
                       float(tau[0]), float(tau[-1]), edge)


def dt_extrapolate(pairs: Iterable[Sequence[float]], rtol: float = 1e-6) -> tuple[float, float]:
    """First-order Richardson extrapolation in ``dt`` and the observed order.

    ``pairs`` are ``(dt, epsilon)`` with at least three ``dt`` forming a
    geometric ladder.  The order comes from the three finest steps.
    """
    pts = sorted((float(d), float(e)) for d, e in pairs)
    if len(pts) < 3:
        raise ValueError("need at least three time steps")
    dts = np.array([p[0] for p in pts])
    eps = np.array([p[1] for p in pts])
    if np.any(dts <= 0):
        raise ValueError("time steps must be positive")
    ratios = dts[1:] / dts[:-1]
    r = ratios[0]
    if r <= 1 or np.any(np.abs(ratios - r) > rtol * r):
        raise ValueError(f"time steps {dts.tolist()} are not a geometric ladder")
    fine, mid, coarse = eps[0], eps[1], eps[2]
    d_fine = mid - fine
    d_coarse = coarse - mid
    if d_fine == 0 or d_coarse == 0 or (d_fine > 0) != (d_coarse > 0):
        order = math.nan
    else:
        order = math.log(d_coarse / d_fine) / math.log(r)
    return fine - d_fine / (r - 1.0), order
