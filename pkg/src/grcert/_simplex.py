"""Dense two-phase primal simplex with bounded variables.

This is the hot kernel: it runs once per neuron bound, once per
branch-and-bound node and once per dependency sub-problem, so it is
compiled with numba unless GRCERT_JIT=0 (see _accel).  The code is a
single nopython-compatible function over flat arrays.

Problem form solved:  min c.x  s.t.  A x <sense> b,  lb <= x <= ub
with every lower bound finite (upper bounds may be +inf).  Senses are
-1 (<=), 0 (=), +1 (>=).

Method: shift variables to [0, U]; slack the inequality rows; run
phase 1 on artificial variables, then phase 2 on the real objective,
keeping both reduced-cost rows up to date.  Nonbasic variables rest at
either bound; the ratio test allows bound flips.  Pivoting uses Bland's
rule by default (anti-cycling); Dantzig pricing is available for speed.
Ties in the leaving row always break on the smallest variable index.
"""

import numpy as np

from ._accel import njit

OPTIMAL = 0
INFEASIBLE = 1
ITER_LIMIT = 2
CUTOFF_STOP = 3
NUMERIC_FAIL = 4

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
PIV_TOL = 1e-9


@njit(cache=True, nogil=True)
def simplex_core(A, b, senses, lb, ub, c, iter_cap, bland, cut_enabled, cut_value):
    m, n = A.shape

    # Shifted problem: y = x - lb in [0, U].
    U = np.empty(n)
    for j in range(n):
        U[j] = ub[j] - lb[j]
    b2 = b - A @ lb
    shift = 0.0
    for j in range(n):
        shift += c[j] * lb[j]

    n_slack = 0
    for i in range(m):
        if senses[i] != 0:
            n_slack += 1
    ncols = n + n_slack + m  # worst case: artificial in every row

    T = np.zeros((m, ncols))
    T[:, :n] = A
    rhs = b2.copy()
    # >= rows become <= by negation.
    for i in range(m):
        if senses[i] == 1:
            T[i, :n] = -T[i, :n]
            rhs[i] = -rhs[i]

    Uall = np.empty(ncols)
    for j in range(n):
        Uall[j] = U[j]
    for j in range(n, ncols):
        Uall[j] = np.inf

    is_art = np.zeros(ncols, dtype=np.bool_)
    barred = np.zeros(ncols, dtype=np.bool_)
    basis = np.empty(m, dtype=np.int64)
    beta = np.zeros(m)

    # Slack columns, then artificials where the slack cannot start basic.
    scol = n
    acol = n + n_slack
    n_art = 0
    for i in range(m):
        has_slack = senses[i] != 0
        if has_slack:
            T[i, scol] = 1.0
        if rhs[i] < 0.0:
            for j in range(scol + (1 if has_slack else 0)):
                T[i, j] = -T[i, j]
            if has_slack:
                T[i, scol] = -1.0
            rhs[i] = -rhs[i]
            has_nonneg_slack = False
        else:
            has_nonneg_slack = has_slack
        if has_nonneg_slack:
            basis[i] = scol
        else:
            T[i, acol] = 1.0
            is_art[acol] = True
            basis[i] = acol
            acol += 1
            n_art += 1
        beta[i] = rhs[i]
        if has_slack:
            scol += 1

    ncols_used = acol
    in_basis = np.zeros(ncols_used, dtype=np.bool_)
    for i in range(m):
        in_basis[basis[i]] = True
    at_upper = np.zeros(ncols_used, dtype=np.bool_)

    # Reduced-cost rows for both phases plus incremental objective values.
    # Sized like the tableau: _pivot sweeps every tableau column (the
    # trailing unused artificial slots stay zero throughout).
    d1 = np.zeros(ncols)
    d2 = np.zeros(ncols)
    for j in range(n):
        d2[j] = c[j]
    z1 = 0.0
    for i in range(m):
        if is_art[basis[i]]:
            z1 += beta[i]
            for j in range(ncols):
                d1[j] -= T[i, j]
    for j in range(ncols_used):
        if is_art[j]:
            d1[j] += 1.0
    z2 = 0.0  # phase-2 objective of the shifted problem (all nonbasic at 0)

    phase = 1 if n_art > 0 else 2
    iters = 0
    status = OPTIMAL

    while True:
        if iters >= iter_cap:
            status = ITER_LIMIT
            break
        if phase == 2 and cut_enabled and z2 + shift < cut_value - OPT_TOL:
            status = CUTOFF_STOP
            break

        d = d1 if phase == 1 else d2
        enter = -1
        best_score = -OPT_TOL
        for j in range(ncols_used):
            if in_basis[j] or barred[j] or Uall[j] <= 0.0:
                continue
            if phase == 2 and is_art[j]:
                continue
            if at_upper[j]:
                score = -d[j]
            else:
                score = d[j]
            if score < best_score:
                enter = j
                if bland:
                    break
                best_score = score
        if enter == -1:
            if phase == 1:
                scale = 1.0
                for i in range(m):
                    if np.abs(rhs[i]) > scale - 1.0:
                        scale = 1.0 + np.abs(rhs[i])
                if z1 > FEAS_TOL * scale:
                    status = INFEASIBLE
                    break
                # Pivot remaining artificials out of the basis when possible.
                for i in range(m):
                    if not is_art[basis[i]]:
                        continue
                    piv_j = -1
                    for j in range(ncols_used):
                        if is_art[j] or in_basis[j] or barred[j]:
                            continue
                        if np.abs(T[i, j]) > PIV_TOL:
                            piv_j = j
                            break
                    if piv_j >= 0:
                        _pivot(T, d1, d2, i, piv_j)
                        old = basis[i]
                        in_basis[old] = False
                        barred[old] = True
                        in_basis[piv_j] = True
                        basis[i] = piv_j
                        at_upper[piv_j] = False
                for j in range(ncols_used):
                    if is_art[j] and not in_basis[j]:
                        barred[j] = True
                phase = 2
                continue
            status = OPTIMAL
            break

        direction = -1.0 if at_upper[enter] else 1.0

        # Ratio test: first basic variable to hit a bound, or a bound flip.
        t_best = Uall[enter]
        leave = -1
        leave_to_upper = False
        for i in range(m):
            y = T[i, enter] * direction
            if y > PIV_TOL:
                limit = beta[i] / y
                hit_upper = False
            elif y < -PIV_TOL and Uall[basis[i]] != np.inf:
                limit = (Uall[basis[i]] - beta[i]) / (-y)
                hit_upper = True
            else:
                continue
            if limit < 0.0:
                limit = 0.0
            if limit < t_best - PIV_TOL or (
                limit < t_best + PIV_TOL and leave >= 0 and basis[i] < basis[leave]
            ):
                t_best = limit
                leave = i
                leave_to_upper = hit_upper
        if t_best == np.inf:
            status = NUMERIC_FAIL
            break

        move = direction * t_best
        z1 += d1[enter] * move
        z2 += d2[enter] * move

        if leave == -1:
            # Bound flip: the entering variable runs to its other bound.
            for i in range(m):
                beta[i] -= move * T[i, enter]
            at_upper[enter] = not at_upper[enter]
        else:
            for i in range(m):
                beta[i] -= move * T[i, enter]
            entering_value = (Uall[enter] - t_best) if at_upper[enter] else t_best
            _pivot(T, d1, d2, leave, enter)
            old = basis[leave]
            in_basis[old] = False
            at_upper[old] = leave_to_upper
            if is_art[old]:
                barred[old] = True
            in_basis[enter] = True
            at_upper[enter] = False
            basis[leave] = enter
            beta[leave] = entering_value
        iters += 1

    # Recover the unshifted solution.
    x = np.zeros(n)
    for j in range(n):
        if j < ncols_used and at_upper[j] and Uall[j] != np.inf:
            x[j] = Uall[j]
    for i in range(m):
        j = basis[i]
        if j < n:
            v = beta[i]
            if v < 0.0:
                v = 0.0
            if Uall[j] != np.inf and v > Uall[j]:
                v = Uall[j]
            x[j] = v
    for j in range(n):
        x[j] += lb[j]
    obj = 0.0
    for j in range(n):
        obj += c[j] * x[j]

    feasible = phase == 2 and status != INFEASIBLE
    if status == ITER_LIMIT and phase == 1:
        feasible = False
    return status, obj, x, iters, feasible


@njit(cache=True, nogil=True)
def _pivot(T, d1, d2, r, col):
    # Updates the tableau and both reduced-cost rows only; basic values
    # are stepped separately by the caller (they are current values, not
    # B^-1 b, because nonbasic variables may rest at their upper bound).
    m, ncols = T.shape
    piv = T[r, col]
    inv = 1.0 / piv
    for j in range(ncols):
        T[r, j] *= inv
    for i in range(m):
        if i == r:
            continue
        f = T[i, col]
        if f != 0.0:
            for j in range(ncols):
                T[i, j] -= f * T[r, j]
    f1 = d1[col]
    if f1 != 0.0:
        for j in range(ncols):
            d1[j] -= f1 * T[r, j]
    f2 = d2[col]
    if f2 != 0.0:
        for j in range(ncols):
            d2[j] -= f2 * T[r, j]
