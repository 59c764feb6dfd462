"""Mixed spherical p-spin models described by their mixture polynomial.

A model is fixed by the weights ``a_p`` of the covariance polynomial
``f(q) = sum_p a_p q**p``.  Everything the dynamical equations need
(``f``, ``f'``, ``f''``) and the threshold energy follow from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class MixtureSpec:
    """Sparse mixture ``{degree: weight}`` stored as sorted ``(p, a_p)`` pairs."""

    terms: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if not self.terms:
            raise ConfigError("mixture needs at least one (degree, weight) term")
        seen = set()
        for p, a in self.terms:
            if int(p) != p or p < 2:
                raise ConfigError(f"degree must be an integer >= 2, got {p!r}")
            if p in seen:
                raise ConfigError(f"degree {p} listed twice")
            seen.add(p)
            if not math.isfinite(a) or a < 0:
                raise ConfigError(f"weight a_{p} must be finite and >= 0, got {a!r}")
        if not any(a > 0 for _, a in self.terms):
            raise ConfigError("at least one weight a_p must be positive")
        object.__setattr__(
            self, "terms", tuple(sorted((int(p), float(a)) for p, a in self.terms))
        )

    @classmethod
    def from_pairs(cls, pairs: Iterable[Iterable[float]] | Mapping[int, float]) -> "MixtureSpec":
        """Build from ``[[3, 1.0], [14, 1.0]]`` or ``{3: 1.0, 14: 1.0}``."""
        if isinstance(pairs, Mapping):
            items = list(pairs.items())
        else:
            items = []
            for pair in pairs:
                pair = list(pair)
                if len(pair) != 2:
                    raise ConfigError(f"mixture term must be [degree, weight], got {pair!r}")
                items.append((pair[0], pair[1]))
        try:
            return cls(tuple((int(p) if float(p) == int(p) else p, float(a)) for p, a in items))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad mixture specification {pairs!r}: {exc}") from exc

    @classmethod
    def pure(cls, p: int) -> "MixtureSpec":
        return cls(((p, 1.0),))

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.terms)

    @property
    def max_degree(self) -> int:
        return self.terms[-1][0]

    def to_pairs(self) -> list[list[float]]:
        return [[p, a] for p, a in self.terms]

    def dense_coefficients(self, order: int = 0) -> np.ndarray:
        """Coefficients of the ``order``-th derivative, highest degree first.

        This is the layout the Horner kernels consume.
        """
        if order not in (0, 1, 2):
            raise ValueError(f"derivative order must be 0, 1 or 2, got {order!r}")
        deg = self.max_degree - order
        coefs = np.zeros(deg + 1)
        for p, a in self.terms:
            factor = 1.0
            for j in range(order):
                factor *= p - j
            coefs[deg - (p - order)] += a * factor
        return coefs

    def f(self, q, order: int = 0):
        """Evaluate ``f``, ``f'`` or ``f''`` at a real or complex scalar/array."""
        return f_eval(self, q, order)

    def threshold_energy(self) -> float:
        return threshold_energy(self)


def f_eval(spec: MixtureSpec, q, derivative_order: int = 0):
    """Horner evaluation of the mixture polynomial or one of its derivatives.

    Works on Python/NumPy scalars and arrays, real or complex.  Real input
    gives results whose imaginary part is exactly zero.
    """
    if derivative_order not in (0, 1, 2):
        raise ValueError(f"derivative order must be 0, 1 or 2, got {derivative_order!r}")
    coefs = spec.dense_coefficients(derivative_order)
    acc = coefs[0] * np.ones_like(q) if isinstance(q, np.ndarray) else coefs[0] + 0 * q
    for c in coefs[1:]:
        acc = acc * q + c
    return acc


def threshold_energy(spec: MixtureSpec) -> float:
    """Energy density at which typical stationary points turn from minima to saddles."""
    f0 = float(f_eval(spec, 1.0, 0))
    f1 = float(f_eval(spec, 1.0, 1))
    f2 = float(f_eval(spec, 1.0, 2))
    if f2 <= 0:
        raise ConfigError("threshold energy needs f''(1) > 0")
    return -(f0 * (f2 - f1) + f1 * f1) / (f1 * math.sqrt(2.0 * f2))
