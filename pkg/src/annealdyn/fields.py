"""Two-time grids and per-time solver traces shared by both solvers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MemoryCapError

DEFAULT_MEMORY_CAP = 3 * 2**30
TOL_C = 0.02


def grid_bytes(n_steps: int) -> int:
    """Bytes needed for the C and R grids of an ``n_steps`` run."""
    side = n_steps + 1
    return 2 * side * side * 8


def check_memory(n_steps: int, cap_bytes: int | None) -> None:
    need = grid_bytes(n_steps)
    if cap_bytes is not None and need > cap_bytes:
        raise MemoryCapError(need, cap_bytes)


class TwoTimeField:
    """Causal two-time function on the grid ``t_k = k dt``.

    ``data`` is the mirrored square storage described in ``_kernels``; use
    ``field(k, j)`` or ``lower()`` rather than indexing it directly.
    """

    def __init__(self, data: np.ndarray, kind: str):
        if kind not in ("correlation", "response"):
            raise ValueError(kind)
        self.data = data
        self.kind = kind

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def __call__(self, k: int, j: int) -> float:
        if k < j:
            if self.kind == "response":
                return 0.0
            k, j = j, k
        if k == j:
            return 1.0 if self.kind == "correlation" else 0.0
        return float(self.data[k, j])

    def row(self, k: int) -> np.ndarray:
        """``X(t_k, t_j)`` for ``j = 0..k``."""
        return self.data[k, : k + 1]

    def column_from_diagonal(self, j: int) -> np.ndarray:
        """``X(t_k, t_j)`` for ``k = j..n-1``."""
        out = np.empty(self.n - j)
        out[0] = self(j, j)
        out[1:] = self.data[j, j + 1 :]
        return out

    def lower(self) -> np.ndarray:
        """Dense ``X(t_k, t_j)`` for all ``k, j`` (symmetric for C, strictly lower for R)."""
        low = np.tril(self.data, -1)
        if self.kind == "correlation":
            return low + low.T + np.eye(self.n)
        return low

    def triangle(self) -> np.ndarray:
        """Packed row-major lower triangle (k >= j), the dump format."""
        rows, cols = np.tril_indices(self.n)
        return self.data[rows, cols]


@dataclass
class SolverTrace:
    """Per-time diagnostics; ``nan`` marks values that are deliberately not computed."""

    times: np.ndarray
    s: np.ndarray
    z: np.ndarray
    energy: np.ndarray
    constraint_residual: np.ndarray
    A: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    @property
    def energy_final(self) -> float:
        return float(self.energy[-1])

    @property
    def z_final(self) -> float | None:
        z = float(self.z[-1])
        return None if np.isnan(z) else z

    def columns(self) -> dict[str, np.ndarray]:
        cols = {
            "t": self.times,
            "s": self.s,
            "z": self.z,
            "epsilon": self.energy,
            "constraint_residual": self.constraint_residual,
        }
        if self.A is not None:
            cols["A"] = self.A
        return cols


def new_grids(n_steps: int, cap_bytes: int | None) -> tuple[np.ndarray, np.ndarray]:
    check_memory(n_steps, cap_bytes)
    side = n_steps + 1
    C = np.zeros((side, side))
    R = np.zeros((side, side))
    C[0, 0] = 1.0
    return C, R


def close_row(C: np.ndarray, R: np.ndarray, k: int) -> None:
    """Pin the diagonal of row ``k`` and mirror the row into column ``k``."""
    C[k, k] = 1.0
    R[k, k] = 0.0
    C[:k, k] = C[k, :k]
    R[:k, k] = R[k, :k]


def cauchy_schwarz_excess(C: np.ndarray, k: int) -> float:
    """``max_j |C(t_k, t_j)| - 1`` clipped at zero."""
    return max(0.0, float(np.max(np.abs(C[k, : k + 1]))) - 1.0)
