"""Numba kernels for the two-time updates.

Storage convention (shared by both solvers): ``C`` and ``R`` are square
``(n+1, n+1)`` arrays.  Row ``k`` holds ``X(t_k, t_j)`` for ``j <= k``; once
row ``k`` is complete it is mirrored into column ``k``, so ``X[j, m]`` with
``m > j`` holds ``X(t_m, t_j)``.  For ``C`` this is plain symmetry.  For ``R``
the mirror half is the *transposed* response ``R(t_m, t_j)``, which lets the
response integrals read a contiguous row instead of a strided column.

Every reduction runs serially in ascending ``t''``; parallelism is over ``t'``
only, so results do not depend on the thread count.
"""
import numpy as np
from numba import njit, prange


@njit(cache=True)
def horner(coefs, x):
    acc = coefs[0] * (x * 0 + 1)
    for i in range(1, coefs.shape[0]):
        acc = acc * x + coefs[i]
    return acc


@njit(cache=True)
def langevin_scalars(C, R, k, s, dt, d1, d2, a_vec, b_vec):
    """Fill the memory weights for row ``k`` and return ``(z, energy)``.

    ``a_vec[j] = dt s_j f''(C_kj) R_kj`` and ``b_vec[j] = dt s_j f'(C_kj)``.
    """
    sum_ac = 0.0
    sum_b = 0.0
    for j in range(k):
        c = C[k, j]
        r = R[k, j]
        w = dt * s[j]
        a = w * horner(d2, c) * r
        b = w * horner(d1, c)
        a_vec[j] = a
        b_vec[j] = b
        sum_ac += a * c
        sum_b += b * r
    sk = s[k]
    z = 0.5 * sk * sum_ac + 0.5 * sk * sum_b + 1.0 - sk
    return z, -0.5 * sum_b


@njit(parallel=True, cache=True)
def langevin_row(C, R, k, s, dt, z, a_vec, b_vec, c_new, r_new):
    """Forward-Euler values of row ``k+1`` for ``t' = 0..k`` into ``c_new``/``r_new``."""
    half_s = 0.5 * s[k]
    for tp in prange(k + 1):
        # int_0^t f''[C(t,t'')] R(t,t'') C(t'',t')
        i1 = 0.0
        for j in range(k):
            i1 += a_vec[j] * C[tp, j]
        # int_0^t' f'[C(t,t'')] R(t',t'')
        i2 = 0.0
        for j in range(tp):
            i2 += b_vec[j] * R[tp, j]
        # int_t'^t f''[C(t,t'')] R(t,t'') R(t'',t'); mirror half holds R(t'',t')
        i3 = 0.0
        for j in range(tp + 1, k):
            i3 += a_vec[j] * R[tp, j]
        c = C[k, tp]
        r = R[k, tp]
        c_new[tp] = c + dt * (-z * c + half_s * (i1 + i2))
        r_new[tp] = r + dt * (-z * r + half_s * i3)


@njit(cache=True)
def keldysh_scalars(C, R, k, sJ, sK, dt, A_prev, d0, d1, u_vec, v_vec):
    """Memory weights for row ``k`` (k >= 1) and ``(z, A, energy)``.

    With ``Q = C - iR/2`` and ``g_j = dt sJ_j f'(Q(t_k, t_j))``:
    ``u_vec = Im g`` and ``v_vec = Re g``.
    """
    sum_z = 0.0
    sum_dA = 0.0
    sum_e = 0.0
    for j in range(k):
        q = complex(C[k, j], -0.5 * R[k, j])
        w = dt * sJ[j]
        g = w * horner(d1, q)
        u_vec[j] = g.imag
        v_vec[j] = g.real
        sum_z += (g * q).imag
        imf = horner(d0, q).imag
        if j < k - 1:
            imf_prev = horner(d0, complex(C[k - 1, j], -0.5 * R[k - 1, j])).imag
        else:
            imf_prev = 0.0  # Q(t-dt, t-dt) = 1 is real
        sum_dA += w * (imf - imf_prev) / dt
        sum_e += dt * sJ[j] * imf
    z = 2.0 * sK[k] * A_prev - sJ[k] * sum_z
    ratio = sK[k - 1] / sK[k]
    A = ratio * ratio * A_prev - sJ[k] * dt / sK[k] * sum_dA
    return z, A, sum_e


@njit(cache=True)
def keldysh_energy_row(C, R, k, sJ, dt, d0):
    total = 0.0
    for j in range(k):
        total += dt * sJ[j] * horner(d0, complex(C[k, j], -0.5 * R[k, j])).imag
    return total


@njit(parallel=True, cache=True)
def keldysh_row(C, R, k, sJ, sK, dt, z, u_vec, v_vec, c_new, r_new):
    """Three-point-stencil values of row ``k+1`` for ``t' = 0..k-1``."""
    sk = sK[k]
    skm = sK[k - 1]
    dt2 = dt * dt
    sj = sJ[k]
    for tp in prange(k):
        # sum_j Im[g_j Q(t', t_j)], Q(t',t_j) = C - i R(t',t_j)/2 with R = 0 for j >= t'
        ic = 0.0
        for j in range(k):
            ic += u_vec[j] * C[tp, j]
        ir_lo = 0.0
        for j in range(tp):
            ir_lo += v_vec[j] * R[tp, j]
        ic -= 0.5 * ir_lo
        # sum_{j >= t'} Im g_j R(t_j, t'); mirror half holds R(t_j, t')
        ir = 0.0
        for j in range(tp + 1, k):
            ir += u_vec[j] * R[tp, j]
        c = C[k, tp]
        r = R[k, tp]
        c_new[tp] = ((sk + skm) * c - skm * C[k - 1, tp] - dt2 * (z * c + sj * ic)) / sk
        r_prev = R[k - 1, tp] if tp < k - 1 else 0.0
        r_new[tp] = ((sk + skm) * r - skm * r_prev - dt2 * (z * r + sj * ir)) / sk


@njit(cache=True)
def keldysh_z_combined(C, R, k, sJ, sK, dt, d1):
    """Lagrange multiplier from the un-simplified three-equation combination.

    Needs rows ``k-1``, ``k`` and ``k+1``; used only as a diagnostic.
    """
    sk = sK[k]
    skm = sK[k - 1]
    c_next = C[k + 1, k]
    c_prev = C[k, k - 1]
    bracket = sk * c_next + sk + skm - skm * c_prev
    acc = 0.0
    for j in range(k):
        q = complex(C[k, j], -0.5 * R[k, j])
        g = dt * sJ[j] * horner(d1, q)
        q_next = complex(C[k + 1, j], -0.5 * R[k + 1, j])
        if j < k - 1:
            q_prev = complex(C[k - 1, j], -0.5 * R[k - 1, j])
        else:
            q_prev = complex(1.0, 0.0)
        acc += (g * (sk * q_next + (sk + skm) * q - skm * q_prev)).imag
    rhs = 2.0 * skm * (sk + skm) * (1.0 - c_prev) / (dt * dt) - sJ[k] * acc
    return rhs / bracket
