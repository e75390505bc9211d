# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trial kernels; mirror _pykernels.simulate_rounds and _pykernels.track.

Floating-point operations follow the Python reference in the same order so
results match bit for bit. Do not build with -ffast-math.
"""
import numpy as np
from libc.math cimport exp, log, floor, sqrt

DEF MAXP = 64
DEF MAXA = 64

DEF EXPLORE = 0
DEF EXPLOIT = 1
DEF FIXED = 2


cdef inline int pick(double u, int n) noexcept nogil:
    cdef int k = <int>(u * n)
    return k if k < n else n - 1


cdef int estimate_players(int coll, int t0, int m) noexcept nogil:
    cdef double ratio
    cdef int n
    if coll == t0:
        return m
    ratio = log((t0 - coll) / <double>t0) / log(1.0 - 1.0 / m)
    n = <int>floor(ratio + 0.5) + 1
    if n < 1:
        n = 1
    if n > m:
        n = m
    return n


cdef inline bint ranks_before(double ma, int a, double mb, int b) noexcept nogil:
    return ma > mb or (ma == mb and a < b)


cdef double gn_cost(double x, double y, const double[:, ::1] anchors, int* idx, int k,
                    double* r, double* s) noexcept nogil:
    cdef double total = 0.0, dx, dy, e
    cdef int j
    for j in range(k):
        dx = x - anchors[idx[j], 0]
        dy = y - anchors[idx[j], 1]
        e = (sqrt(dx * dx + dy * dy) - r[j]) / s[j]
        total += e * e
    return total


cdef void gauss_newton(const double[:, ::1] anchors, int* idx, int k, double* r, double* s,
                       double* px, double* py, int max_iter, double tol) noexcept nogil:
    cdef double x = px[0], y = py[0]
    cdef double cost = gn_cost(x, y, anchors, idx, k, r, s)
    cdef double a11, a12, a22, g1, g2, dx, dy, d, e, jx, jy, tr, det, sx, sy, step, nx = 0.0, ny = 0.0, new_cost = 0.0
    cdef int it, j, bt
    cdef bint improved
    for it in range(max_iter):
        a11 = 0.0
        a12 = 0.0
        a22 = 0.0
        g1 = 0.0
        g2 = 0.0
        for j in range(k):
            dx = x - anchors[idx[j], 0]
            dy = y - anchors[idx[j], 1]
            d = sqrt(dx * dx + dy * dy)
            if d < 1e-9:
                continue
            e = (d - r[j]) / s[j]
            jx = dx / (d * s[j])
            jy = dy / (d * s[j])
            a11 += jx * jx
            a12 += jx * jy
            a22 += jy * jy
            g1 += jx * e
            g2 += jy * e
        tr = a11 + a22
        if tr == 0.0:
            break
        det = a11 * a22 - a12 * a12
        if det <= 1e-12 * tr * tr:
            a11 += 1e-6 * tr
            a22 += 1e-6 * tr
            det = a11 * a22 - a12 * a12
        sx = -(a22 * g1 - a12 * g2) / det
        sy = -(a11 * g2 - a12 * g1) / det
        step = 1.0
        improved = False
        for bt in range(30):
            nx = x + step * sx
            ny = y + step * sy
            new_cost = gn_cost(nx, ny, anchors, idx, k, r, s)
            if new_cost <= cost:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        x = nx
        y = ny
        cost = new_cost
        if step * sqrt(sx * sx + sy * sy) < tol:
            break
    px[0] = x
    py[0] = y


def track(anchors, ranges, stds, valid, start, int max_iter=50, double tol=1e-3):
    cdef const double[:, ::1] A = np.ascontiguousarray(anchors, dtype=np.float64)
    cdef const double[:, ::1] R = np.ascontiguousarray(ranges, dtype=np.float64)
    cdef const double[:, ::1] S = np.ascontiguousarray(stds, dtype=np.float64)
    cdef const signed char[:, ::1] V = np.ascontiguousarray(valid, dtype=np.int8)
    cdef Py_ssize_t C = R.shape[0], N = R.shape[1]
    if N > MAXP:
        raise ValueError("too many nodes for the compiled kernel")
    est_arr = np.empty((C, 2))
    fit_arr = np.zeros(C, dtype=np.int8)
    cdef double[:, ::1] est = est_arr
    cdef signed char[::1] fitted = fit_arr
    cdef double x = float(start[0]), y = float(start[1])
    cdef int idx[MAXP]
    cdef double rr[MAXP]
    cdef double ss[MAXP]
    cdef Py_ssize_t c, i
    cdef int k
    with nogil:
        for c in range(C):
            k = 0
            for i in range(N):
                if V[c, i]:
                    idx[k] = <int>i
                    rr[k] = R[c, i]
                    ss[k] = S[c, i]
                    k += 1
            if k >= 2:
                gauss_newton(A, idx, k, rr, ss, &x, &y, max_iter, tol)
                fitted[c] = 1
            est[c, 0] = x
            est[c, 1] = y
    return est_arr, fit_arr


def simulate_rounds(int algorithm, means, sigma, noise, unif, tracked,
                    int explore_len, int settle, int subblocks,
                    double eta, double forgetting, double ix):
    cdef const double[:, ::1] mu = np.ascontiguousarray(means, dtype=np.float64)
    cdef const double[::1] sig = np.ascontiguousarray(sigma, dtype=np.float64)
    cdef const double[:, ::1] z = np.ascontiguousarray(noise, dtype=np.float64)
    cdef const double[:, :, ::1] u = np.ascontiguousarray(unif, dtype=np.float64)
    cdef const signed char[::1] trk = np.ascontiguousarray(tracked, dtype=np.int8)
    cdef int T = mu.shape[0], M = mu.shape[1], N = z.shape[1]
    if N > MAXP or M > MAXA:
        raise ValueError("problem too large for the compiled kernel")
    if algorithm not in (0, 1, 2):
        raise ValueError(f"unknown algorithm code {algorithm}")

    act_arr = np.zeros((T, N), dtype=np.int8)
    rew_arr = np.zeros((T, N))
    col_arr = np.zeros((T, N), dtype=np.int8)
    cdef signed char[:, ::1] actions = act_arr
    cdef double[:, ::1] rewards = rew_arr
    cdef signed char[:, ::1] collided = col_arr

    # Sense & Avoid
    cdef int saa_arm[MAXP]
    cdef bint saa_hit[MAXP]
    # Musical Chairs (also the C&P warm-up)
    cdef int mc_phase[MAXP]
    cdef double mc_sums[MAXP][MAXA]
    cdef long mc_counts[MAXP][MAXA]
    cdef int mc_coll[MAXP]
    cdef int mc_steps[MAXP]
    cdef int mc_nhat[MAXP]
    cdef int mc_best[MAXP][MAXA]
    cdef int mc_fixed[MAXP]
    cdef double est_means[MAXA]
    # C&P roles
    cdef int rank[MAXP]
    cdef double logw[MAXA]
    cdef double w[MAXA]
    cdef bint used[MAXA]
    cdef int meta[MAXP]
    cdef int assigned[MAXP]
    cdef bint f_latched[MAXP]
    cdef double p_own = 1.0, own_sum = 0.0
    cdef int own_count = 0, blocks = 0
    cdef bint c_latched = False
    cdef int failures = 0

    cdef int act[MAXP]
    cdef int col[MAXP]
    cdef bint supp[MAXA + 1]
    cdef int order[MAXP]

    cdef int t, i, j, a, b, k, n, sub, step, pos = 0, choice, arm, order_a
    cdef int block_len = M * subblocks
    cdef int cp_start = explore_len + settle if algorithm == 2 else -1
    cdef bint started = False, ready
    cdef double decay = forgetting ** block_len
    cdef double m, r, total, target, acc, top, s, ma, mb
    cdef long cnt

    for i in range(N):
        saa_arm[i] = 0
        saa_hit[i] = False
        mc_phase[i] = EXPLORE
        mc_coll[i] = 0
        mc_steps[i] = 0
        mc_nhat[i] = 0
        mc_fixed[i] = 0
        rank[i] = 0
        assigned[i] = 0
        f_latched[i] = False
        for a in range(M):
            mc_sums[i][a] = 0.0
            mc_counts[i][a] = 0
    for a in range(M):
        logw[a] = 0.0
    for a in range(M + 1):
        supp[a] = False

    with nogil:
        for t in range(T):
            # C&P start: rank nodes once every warm-up is seated on distinct arms
            if algorithm == 2 and not started and t == cp_start:
                ready = True
                for i in range(N):
                    if mc_phase[i] != FIXED:
                        ready = False
                    for j in range(i):
                        if mc_fixed[j] == mc_fixed[i]:
                            ready = False
                if ready:
                    for a in range(M):
                        s = 0.0
                        cnt = 0
                        for i in range(N):
                            s += mc_sums[i][a]
                            cnt += mc_counts[i][a]
                        est_means[a] = s / cnt if cnt else 0.0
                    for i in range(N):
                        order[i] = i
                    for i in range(1, N):
                        j = i
                        while j > 0:
                            a = mc_fixed[order[j]]
                            b = mc_fixed[order[j - 1]]
                            if ranks_before(est_means[a - 1], a, est_means[b - 1], b):
                                k = order[j]
                                order[j] = order[j - 1]
                                order[j - 1] = k
                                j -= 1
                            else:
                                break
                    for i in range(N):
                        rank[order[i]] = i + 1
                    started = True
                    pos = 0
                else:
                    cp_start += block_len

            # select
            for i in range(N):
                if algorithm == 0:
                    if saa_arm[i] == 0:
                        saa_arm[i] = pick(u[i, t, 0], M) + 1
                    elif saa_hit[i]:
                        k = pick(u[i, t, 0], M - 1) + 1
                        saa_arm[i] = k if k < saa_arm[i] else k + 1
                    act[i] = saa_arm[i]
                elif not started:
                    if mc_phase[i] == EXPLORE:
                        act[i] = pick(u[i, t, 0], M) + 1
                    elif mc_phase[i] == EXPLOIT:
                        act[i] = mc_best[i][pick(u[i, t, 0], mc_nhat[i])]
                    else:
                        act[i] = mc_fixed[i]
                else:
                    sub = pos // M
                    step = pos % M
                    if rank[i] == 1:
                        if pos == 0:
                            if blocks > 0:
                                if own_count:
                                    logw[meta[0] - 1] -= eta * (1.0 - own_sum / own_count) / (p_own + ix)
                                for a in range(M):
                                    logw[a] = logw[a] * decay
                            top = logw[0]
                            for a in range(1, M):
                                if logw[a] > top:
                                    top = logw[a]
                            for a in range(M):
                                w[a] = exp(logw[a] - top)
                                used[a] = False
                            for k in range(N):
                                total = 0.0
                                for a in range(M):
                                    if not used[a]:
                                        total += w[a]
                                target = u[i, t, k] * total
                                acc = 0.0
                                choice = -1
                                for a in range(M):
                                    if not used[a]:
                                        choice = a
                                for a in range(M):
                                    if not used[a]:
                                        acc += w[a]
                                        if target < acc:
                                            choice = a
                                            break
                                meta[k] = choice + 1
                                used[choice] = True
                            total = 0.0
                            for a in range(M):
                                total += w[a]
                            p_own = w[meta[0] - 1] / total
                            own_sum = 0.0
                            own_count = 0
                            blocks += 1
                        if step == 0:
                            c_latched = False
                        if sub < N - 1 and not c_latched:
                            act[i] = meta[sub + 1]
                        else:
                            act[i] = meta[0]
                    else:
                        if pos == 0:
                            assigned[i] = 0
                            f_latched[i] = False
                        if sub < N - 1:
                            if sub == rank[i] - 2:
                                act[i] = assigned[i] if f_latched[i] else step + 1
                            else:
                                act[i] = 0
                        elif assigned[i] == 0:
                            if sub == N - 1 and step == 0:
                                failures += 1
                            act[i] = 0
                        else:
                            act[i] = assigned[i]

            # resolve
            for i in range(N):
                col[i] = 0
                if act[i] != 0:
                    for j in range(N):
                        if j != i and act[j] == act[i]:
                            col[i] = 1
                            break
            for i in range(N):
                arm = act[i]
                if arm == 0 or col[i]:
                    r = 0.0
                else:
                    m = 0.0 if supp[arm] else mu[t, arm - 1]
                    r = m + sig[arm - 1] * z[t, i]
                    if r > 1.0:
                        r = 1.0
                    if r < 0.0:
                        r = 0.0
                actions[t, i] = <signed char>arm
                rewards[t, i] = r
                collided[t, i] = <signed char>col[i]

            # observe
            for i in range(N):
                arm = act[i]
                r = rewards[t, i]
                if algorithm == 0:
                    saa_hit[i] = col[i] != 0
                elif not started:
                    if mc_phase[i] == EXPLORE:
                        if col[i]:
                            mc_coll[i] += 1
                        else:
                            mc_sums[i][arm - 1] += r
                            mc_counts[i][arm - 1] += 1
                        mc_steps[i] += 1
                        if mc_steps[i] == explore_len:
                            n = estimate_players(mc_coll[i], explore_len, M)
                            mc_nhat[i] = n
                            for a in range(M):
                                est_means[a] = mc_sums[i][a] / mc_counts[i][a] if mc_counts[i][a] else 0.0
                            # insertion sort of arms by (-mean, arm)
                            for a in range(M):
                                order_a = a + 1
                                j = a
                                mc_best[i][j] = order_a
                                while j > 0:
                                    b = mc_best[i][j - 1]
                                    if ranks_before(est_means[order_a - 1], order_a, est_means[b - 1], b):
                                        mc_best[i][j] = b
                                        mc_best[i][j - 1] = order_a
                                        j -= 1
                                    else:
                                        break
                            mc_phase[i] = EXPLOIT
                    elif mc_phase[i] == EXPLOIT and not col[i]:
                        mc_fixed[i] = arm
                        mc_phase[i] = FIXED
                else:
                    if rank[i] == 1:
                        if col[i] and pos // M < N - 1:
                            c_latched = True
                        if arm == meta[0]:
                            own_sum += r
                            own_count += 1
                    else:
                        if col[i] and not f_latched[i] and pos // M == rank[i] - 2:
                            f_latched[i] = True
                            assigned[i] = arm
            if started:
                pos = (pos + 1) % block_len

            # reactive emitter: arms used now by tracked nodes are suppressed next step
            for a in range(M + 1):
                supp[a] = False
            for i in range(N):
                if trk[i] and act[i] != 0:
                    supp[act[i]] = True

    ranks = tuple(rank[i] for i in range(N)) if started else ()
    return act_arr, rew_arr, col_arr, (cp_start if started else -1), ranks, failures
