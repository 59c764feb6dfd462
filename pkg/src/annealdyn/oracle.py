"""Finite-N Monte Carlo of the spherical Langevin dynamics.

Direct Euler-Maruyama integration of ``N`` spins on the sphere of radius
``sqrt(N)`` with explicit Gaussian couplings.  It exists to check the
mean-field solver at small ``N`` and short times, so only degrees 2 and 3
are supported (the dense coupling tensors grow as ``N**p``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import MixtureSpec
from .schedule import Schedule

SUPPORTED_DEGREES = (2, 3)


@dataclass
class DisorderSample:
    """Couplings ``J`` over strictly increasing index tuples, one block per degree.

    ``tuples[p]`` has shape ``(C(N, p), p)`` and ``couplings[p]`` holds the
    matching Gaussian values with variance ``p! / (2 N**(p-1))``.
    """

    n_spins: int
    weights: dict
    tuples: dict
    couplings: dict
    rng_seed: object = None
    _dense: dict | None = None

    def dense(self, p: int) -> np.ndarray:
        """Symmetric tensor with ``J`` on every permutation of each tuple, zeros elsewhere."""
        if self._dense is None:
            self._dense = {}
        if p not in self._dense:
            n = self.n_spins
            T = np.zeros((n,) * p)
            idx = self.tuples[p]
            for perm in itertools.permutations(range(p)):
                T[tuple(idx[:, i] for i in perm)] = self.couplings[p]
            self._dense[p] = T
        return self._dense[p]


def ordered_variance_factor(p: int, n_spins: int) -> float:
    """Sphere-averaged ``Var H_p(sigma) / (N/2)`` for ordered-tuple couplings.

    Summing over strictly increasing tuples drops the repeated-index terms, so
    the finite-N variance is ``e_p(sigma_1**2, ..., sigma_N**2) p! / N**p``
    rather than 1.  Averaged over the uniform sphere this is
    ``1 - 3/(N+2)`` for ``p = 2`` and ``1 - 9/(N+2) + 30/((N+2)(N+4))`` for
    ``p = 3``.  Scaling ``a_p`` by it gives the matching mean-field model.
    """
    n = float(n_spins)
    m4 = 3.0 * n / (n + 2.0)  # E sigma_i**4
    m6 = 15.0 * n * n / ((n + 2.0) * (n + 4.0))  # E sigma_i**6
    if p == 2:
        return (n * n - n * m4) / (n * n)
    if p == 3:
        return (n**3 - 3.0 * n * n * m4 + 2.0 * n * m6) / n**3
    raise ConfigError(f"finite-N oracle supports degrees {SUPPORTED_DEGREES} only, got {p}")


def finite_n_spec(spec: MixtureSpec, n_spins: int) -> MixtureSpec:
    """Mixture whose mean-field covariance matches the ordered-tuple sample at ``N``."""
    _check_degrees(spec)
    return MixtureSpec.from_pairs([(p, a * ordered_variance_factor(p, n_spins))
                                   for p, a in spec.terms])


def _index_tuples(n: int, p: int) -> np.ndarray:
    return np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(n), p)),
                       dtype=np.intp).reshape(-1, p)


def _check_degrees(spec: MixtureSpec) -> None:
    bad = [p for p, a in spec.terms if a > 0 and p not in SUPPORTED_DEGREES]
    if bad:
        raise ConfigError(f"finite-N oracle supports degrees {SUPPORTED_DEGREES} only, got {bad}")


def sample_disorder(spec: MixtureSpec, n_spins: int, rng: np.random.Generator,
                    seed=None) -> DisorderSample:
    _check_degrees(spec)
    if n_spins < max(spec.degrees):
        raise ConfigError("need at least as many spins as the largest degree")
    tuples, couplings, weights = {}, {}, {}
    for p, a in spec.terms:
        if a == 0:
            continue
        idx = _index_tuples(n_spins, p)
        std = math.sqrt(math.factorial(p) / (2.0 * n_spins ** (p - 1)))
        tuples[p] = idx
        couplings[p] = rng.normal(0.0, std, size=len(idx))
        weights[p] = a
    return DisorderSample(n_spins, weights, tuples, couplings, seed)


def random_sphere_point(n_spins: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal(n_spins)
    return x * (math.sqrt(n_spins) / np.linalg.norm(x))


def project_to_sphere(sigma: np.ndarray) -> np.ndarray:
    return sigma * (math.sqrt(sigma.size) / np.linalg.norm(sigma))


def oracle_energy(sigma: np.ndarray, sample: DisorderSample) -> float:
    """``H_0(sigma) / N`` by summing over the ordered tuples directly."""
    total = 0.0
    for p, J in sample.couplings.items():
        prods = np.prod(sigma[sample.tuples[p]], axis=1)
        total += math.sqrt(sample.weights[p]) * float(J @ prods)
    return total / sample.n_spins


def _gradient_terms(sigma, sample):
    """Per-degree gradients of ``H_0``; ``g_p . sigma = p H_p`` by homogeneity."""
    n = sample.n_spins
    out = {}
    for p in sample.couplings:
        T = sample.dense(p)
        if p == 2:
            g = T @ sigma
        else:
            g = 0.5 * (T.reshape(n, n * n) @ np.outer(sigma, sigma).ravel())
        out[p] = math.sqrt(sample.weights[p]) * g
    return out


def oracle_gradient(sigma: np.ndarray, sample: DisorderSample) -> np.ndarray:
    """Unconstrained gradient of ``H_0`` in the ambient space."""
    return sum(_gradient_terms(sigma, sample).values())


def _energy_and_gradient(sigma, sample):
    terms = _gradient_terms(sigma, sample)
    grad = sum(terms.values())
    energy = sum(float(g @ sigma) / p for p, g in terms.items()) / sample.n_spins
    return energy, grad


def oracle_step(sigma, sample: DisorderSample, s: float, dt: float, rng,
                grad: np.ndarray | None = None) -> np.ndarray:
    """One Euler-Maruyama step followed by rescaling back onto the sphere.

    The rescaling plays the role of the Lagrange multiplier ``z(t)``.
    """
    if grad is None:
        grad = oracle_gradient(sigma, sample)
    new = sigma - dt * s * grad
    if s < 1.0:
        new = new + math.sqrt(2.0 * (1.0 - s) * dt) * rng.standard_normal(sigma.size)
    return project_to_sphere(new)


@dataclass
class OracleResult:
    times: np.ndarray
    epsilon_mean: np.ndarray
    epsilon_stderr: np.ndarray
    c_t0_mean: np.ndarray
    c_t0_stderr: np.ndarray
    n_samples: int

    def columns(self):
        return {
            "t": self.times,
            "epsilon_mean": self.epsilon_mean,
            "epsilon_stderr": self.epsilon_stderr,
            "c_t0_mean": self.c_t0_mean,
            "c_t0_stderr": self.c_t0_stderr,
            "n_samples": np.full(self.times.size, self.n_samples),
        }


def run_sample(spec, sched: Schedule, n_spins, dt, n_steps, seed):
    """Energy and ``C(t, 0)`` along one (disorder, noise) trajectory."""
    rng = np.random.default_rng(seed)
    sample = sample_disorder(spec, n_spins, rng, seed)
    sigma0 = random_sphere_point(n_spins, rng)
    sigma = sigma0.copy()
    eps = np.empty(n_steps + 1)
    corr = np.empty(n_steps + 1)
    for k in range(n_steps + 1):
        e, grad = _energy_and_gradient(sigma, sample)
        eps[k] = e
        corr[k] = float(sigma @ sigma0) / n_spins
        if k < n_steps:
            sigma = oracle_step(sigma, sample, sched.s_at(k * dt), dt, rng, grad)
    return eps, corr


def oracle_run(spec: MixtureSpec, sched: Schedule, n_spins: int, dt: float, t_max: float,
               n_samples: int, base_seed: int = 0, seeds=None) -> OracleResult:
    """Sample means and standard errors over independent (disorder, noise) draws.

    Sample ``k`` is seeded with ``SeedSequence([base_seed, k])`` unless
    ``seeds`` gives explicit per-sample seeds.
    """
    _check_degrees(spec)
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2 to estimate a standard error")
    if seeds is not None and len(seeds) != n_samples:
        raise ValueError("seeds must have one entry per sample")
    if t_max > sched.tau * (1 + 1e-9):
        raise ConfigError(f"t_max={t_max} exceeds the schedule runtime {sched.tau}")
    n_steps = round(t_max / dt)
    if n_steps < 1 or abs(n_steps * dt - t_max) > 1e-9 * t_max:
        raise ConfigError(f"t_max={t_max} is not an integer multiple of dt={dt}")
    eps = np.empty((n_samples, n_steps + 1))
    corr = np.empty((n_samples, n_steps + 1))
    for k in range(n_samples):
        seed = np.random.SeedSequence([base_seed, k]) if seeds is None else seeds[k]
        eps[k], corr[k] = run_sample(spec, sched, n_spins, dt, n_steps, seed)
    root_n = math.sqrt(n_samples)
    return OracleResult(
        np.arange(n_steps + 1) * dt,
        eps.mean(axis=0), eps.std(axis=0, ddof=1) / root_n,
        corr.mean(axis=0), corr.std(axis=0, ddof=1) / root_n,
        n_samples,
    )
