# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels with the same contracts as :mod:`optrec._pykernels`."""
import math

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, hypot, isfinite, pow, sqrt

cnp.import_array()

NAME = "compiled"

cdef double TIE_TOL = 1e-12
cdef int MAX_BACKTRACKS = 60

STATUS_CONVERGED = 0
STATUS_MAX_ITERS = 1
STATUS_STALLED = 2
STATUS_NONFINITE = 3


cdef inline double _sign(double x) noexcept nogil:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


cdef class _Sobolev:
    cdef const double[::1] widths, st, w, xi, wq
    cdef double[::1] gsem, glp, gN, r, s, ds, da, db
    cdef const cnp.int64_t[::1] sk
    cdef double tau, alpha, mu, beta, p, radius, Lv, Sv
    cdef bint p_inf
    cdef Py_ssize_t n1, m, nq

    def __init__(self, prob):
        widths, sk, st, w, xi, wq, tau, alpha, mu, beta, p, radius = prob
        self.widths = np.ascontiguousarray(widths, dtype=np.float64)
        self.sk = np.ascontiguousarray(sk, dtype=np.int64)
        self.st = np.ascontiguousarray(st, dtype=np.float64)
        self.w = np.ascontiguousarray(w, dtype=np.float64)
        self.xi = np.ascontiguousarray(xi, dtype=np.float64)
        self.wq = np.ascontiguousarray(wq, dtype=np.float64)
        self.tau, self.alpha, self.mu, self.beta = tau, alpha, mu, beta
        self.p, self.radius = p, radius
        self.p_inf = math.isinf(p)
        self.n1 = self.widths.shape[0] + 1
        self.m = self.w.shape[0]
        self.nq = self.xi.shape[0]
        self.gsem = np.zeros(self.n1)
        self.glp = np.zeros(self.n1)
        self.gN = np.zeros(self.n1)
        self.r = np.zeros(self.m)
        self.s = np.zeros(self.n1 - 1)
        self.ds = np.zeros(self.n1 - 1)
        self.da = np.zeros(self.n1 - 1)
        self.db = np.zeros(self.n1 - 1)

    cdef double _max_abs(self, const double[::1] v, Py_ssize_t n, bint want_grad, double[::1] g,
                         const double[::1] scale) noexcept:
        # max |v_i|; subgradient averages the signs over near-ties, divided by scale
        cdef Py_ssize_t i, cnt = 0
        cdef double top = 0.0, coef
        for i in range(n):
            if fabs(v[i]) > top:
                top = fabs(v[i])
        if want_grad and top > 0.0:
            for i in range(n):
                if fabs(v[i]) >= top - TIE_TOL:
                    cnt += 1
            for i in range(n):
                if fabs(v[i]) >= top - TIE_TOL:
                    coef = _sign(v[i]) / cnt
                    if scale is not None:
                        coef = coef / scale[i]
                    g[i] += coef
        return top

    cdef double _interval(self, double a, double b, Py_ssize_t j, bint want_grad) noexcept:
        # int_0^1 |a(1-t) + bt|^p dt; closed form across a sign change, Gauss-Legendre otherwise
        cdef Py_ssize_t q
        cdef double p = self.p, I = 0.0, ga = 0.0, gb = 0.0, v, av, t, A, B, D, sa, sb
        if (a <= 0.0 and b >= 0.0) or (a >= 0.0 and b <= 0.0):
            A = fabs(a)
            B = fabs(b)
            D = A + B
            if D > 0.0:
                I = (pow(A, p + 1.0) + pow(B, p + 1.0)) / ((p + 1.0) * D)
                if want_grad:
                    sa = _sign(a) if a != 0.0 else -_sign(b)
                    sb = _sign(b) if b != 0.0 else -_sign(a)
                    ga = sa * (pow(A, p) - I) / D
                    gb = sb * (pow(B, p) - I) / D
        else:
            for q in range(self.nq):
                v = a * (1.0 - self.xi[q]) + b * self.xi[q]
                av = fabs(v)
                t = pow(av, p - 1.0)
                I += t * av * self.wq[q]
                if want_grad:
                    t = p * t * _sign(v) * self.wq[q]
                    ga += t * (1.0 - self.xi[q])
                    gb += t * self.xi[q]
        if want_grad:
            self.da[j] = ga
            self.db[j] = gb
        return I

    cdef double _w1(self, const double[::1] c, bint want_grad) noexcept:
        cdef Py_ssize_t j, q, n = self.n1 - 1
        cdef double S = 0.0, L = 0.0, acc, sj, a, b, av, t, base, coef
        cdef double p = self.p
        if want_grad:
            for j in range(self.n1):
                self.gsem[j] = 0.0
                self.glp[j] = 0.0
        # derivative branch
        if self.p_inf:
            for j in range(n):
                self.s[j] = (c[j + 1] - c[j]) / self.widths[j]
                self.ds[j] = 0.0
            S = self._max_abs(self.s, n, want_grad, self.ds, self.widths)
            if want_grad:
                for j in range(n):
                    self.gsem[j] -= self.ds[j]
                    self.gsem[j + 1] += self.ds[j]
        else:
            acc = 0.0
            for j in range(n):
                sj = (c[j + 1] - c[j]) / self.widths[j]
                av = fabs(sj)
                t = pow(av, p - 1.0)
                self.s[j] = sj
                self.ds[j] = t
                acc += t * av * self.widths[j]
            S = pow(acc, 1.0 / p)
            if want_grad and S > 0.0:
                base = pow(S, 1.0 - p)
                for j in range(n):
                    coef = base * self.ds[j] * _sign(self.s[j])
                    self.gsem[j] -= coef
                    self.gsem[j + 1] += coef
        # value branch
        if self.p_inf:
            L = self._max_abs(c, self.n1, want_grad, self.glp, None)
        elif p == 2.0:
            acc = 0.0
            for j in range(n):
                a = c[j]
                b = c[j + 1]
                acc += self.widths[j] * (a * a + a * b + b * b)
            L = sqrt(acc / 3.0)
            if want_grad and L > 0.0:
                for j in range(n):
                    a = c[j]
                    b = c[j + 1]
                    self.glp[j] += self.widths[j] * (2.0 * a + b) / (6.0 * L)
                    self.glp[j + 1] += self.widths[j] * (a + 2.0 * b) / (6.0 * L)
        else:
            acc = 0.0
            for j in range(n):
                acc += self._interval(c[j], c[j + 1], j, want_grad) * self.widths[j]
            L = pow(acc, 1.0 / p)
            if want_grad and L > 0.0:
                base = pow(L, 1.0 - p) / p
                for j in range(n):
                    self.glp[j] += base * self.widths[j] * self.da[j]
                    self.glp[j + 1] += base * self.widths[j] * self.db[j]
        self.Lv = L
        self.Sv = S
        if fabs(L - S) < TIE_TOL:
            if want_grad:
                for j in range(self.n1):
                    self.gN[j] = 0.5 * (self.glp[j] + self.gsem[j])
            return L if L > S else S
        if L > S:
            if want_grad:
                self.gN[:] = self.glp
            return L
        if want_grad:
            self.gN[:] = self.gsem
        return S

    cdef double _data(self, const double[::1] c, bint want_grad, double[::1] grad) noexcept:
        # tau-free data term R^alpha; grad receives tau * its gradient
        cdef Py_ssize_t j, k
        cdef double acc = 0.0, R, coef, t, gr
        for j in range(self.m):
            k = self.sk[j]
            t = self.st[j]
            self.r[j] = (1.0 - t) * c[k] + t * c[k + 1] - self.w[j]
            acc += self.r[j] * self.r[j]
        R = sqrt(acc / self.m)
        if want_grad:
            for j in range(self.n1):
                grad[j] = 0.0
            if R > 0.0:
                if self.alpha == 2.0:
                    coef = 2.0 / self.m
                else:
                    coef = self.alpha * pow(R, self.alpha - 2.0) / self.m
                coef = self.tau * coef
                for j in range(self.m):
                    k = self.sk[j]
                    t = self.st[j]
                    gr = coef * self.r[j]
                    grad[k] += (1.0 - t) * gr
                    grad[k + 1] += t * gr
        return pow(R, self.alpha)

    cdef inline double _scale(self, double N) noexcept:
        if N > 0.0 and self.mu != 0.0:
            return self.mu * self.beta * pow(N, self.beta - 1.0) / self.radius
        return 0.0

    cdef double evaluate(self, const double[::1] c, bint want_grad, double[::1] grad,
                         double* data_out, double* pen_out) noexcept:
        cdef Py_ssize_t j
        cdef double data, N, pen, scale
        data = self._data(c, want_grad, grad)
        N = self._w1(c, want_grad and self.mu != 0.0) / self.radius
        pen = pow(N, self.beta)
        data_out[0] = data
        pen_out[0] = pen
        if want_grad:
            scale = self._scale(N)
            if scale != 0.0:
                for j in range(self.n1):
                    grad[j] += scale * self.gN[j]
        return self.tau * data + self.mu * pen

    cdef double pieces(self, const double[::1] c, bint want_grad, double[::1] g1, double[::1] g2,
                       double* f1, double* f2, int* count) noexcept:
        # the loss as max of its two branch pieces; see _pykernels.sobolev_pieces
        cdef Py_ssize_t j
        cdef double data, NL, NS, sL, sS
        data = self._data(c, want_grad, g1)
        if self.mu == 0.0:
            f1[0] = self.tau * data
            count[0] = 1
            return f1[0]
        self._w1(c, want_grad)
        NL = self.Lv / self.radius
        NS = self.Sv / self.radius
        f1[0] = self.tau * data + self.mu * pow(NL, self.beta)
        f2[0] = self.tau * data + self.mu * pow(NS, self.beta)
        count[0] = 2
        if want_grad:
            sL = self._scale(NL)
            sS = self._scale(NS)
            for j in range(self.n1):
                g2[j] = g1[j] + sS * self.gsem[j]
                g1[j] += sL * self.glp[j]
        return f1[0] if f1[0] >= f2[0] else f2[0]


def sobolev_eval(c, prob, want_grad=True):
    cdef _Sobolev kern = _Sobolev(prob)
    cdef const double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef double data = 0.0, pen = 0.0
    grad = np.zeros(kern.n1)
    loss = kern.evaluate(cv, want_grad, grad, &data, &pen)
    return loss, data, pen, (grad if want_grad else None)


def sobolev_pieces(c, prob, want_grad=True):
    """Same contract as ``_pykernels.sobolev_pieces``."""
    cdef _Sobolev kern = _Sobolev(prob)
    cdef const double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef double f1 = 0.0, f2 = 0.0, f
    cdef int count = 1
    g1 = np.zeros(kern.n1)
    g2 = np.zeros(kern.n1)
    f = kern.pieces(cv, want_grad, g1, g2, &f1, &f2, &count)
    if not want_grad:
        return f, None
    if count == 1:
        return f, [(f1, g1)]
    return f, [(f1, g1), (f2, g2)]


cdef bint _all_finite(double[::1] g) noexcept:
    cdef Py_ssize_t i
    for i in range(g.shape[0]):
        if not isfinite(g[i]):
            return False
    return True


cdef double _direction(double f, double f1, double f2, double[::1] g1, double[::1] g2, int count,
                       double[::1] d) noexcept:
    # writes the search direction into d and returns the decrease measure D
    cdef Py_ssize_t i, n = d.shape[0]
    cdef double uu = 0.0, ug = 0.0, theta, gg = 0.0, u, D
    if count == 1:
        for i in range(n):
            d[i] = -g1[i]
            gg += g1[i] * g1[i]
        return gg
    for i in range(n):
        u = g1[i] - g2[i]
        uu += u * u
        ug += u * g2[i]
    if uu > 0.0:
        theta = ((f1 - f) - (f2 - f) - ug) / uu
        theta = 1.0 if theta > 1.0 else (0.0 if theta < 0.0 else theta)
    else:
        theta = 1.0 if f1 >= f2 else 0.0
    for i in range(n):
        d[i] = -(g2[i] + theta * (g1[i] - g2[i]))
        gg += d[i] * d[i]
    D = gg - theta * (f1 - f) - (1.0 - theta) * (f2 - f)
    return D if D > 0.0 else 0.0


def sobolev_descent(c0, prob, long max_iters, double grad_tol, double c1=1e-4,
                    double shrink=0.5, double initial=1.0, double fixed_step=0.0,
                    bint record=False):
    """Armijo descent on a Sobolev problem; see ``_pykernels.armijo_descent``."""
    cdef _Sobolev kern = _Sobolev(prob)
    cdef Py_ssize_t n1 = kern.n1, i
    cdef double[::1] c = np.array(c0, dtype=np.float64)
    cdef double[::1] cn = np.empty(n1)
    cdef double[::1] g1 = np.empty(n1)
    cdef double[::1] g2 = np.empty(n1)
    cdef double[::1] h1 = np.empty(n1)
    cdef double[::1] h2 = np.empty(n1)
    cdef double[::1] d = np.empty(n1)
    cdef double[::1] tmp
    cdef double f, fn = 0.0, f1 = 0.0, f2 = 0.0, e1 = 0.0, e2 = 0.0, D, gn, a
    cdef int count = 1, ncount = 1
    cdef long it = 0, bt
    cdef int status = STATUS_MAX_ITERS
    cdef bint ok
    history = None
    f = kern.pieces(c, True, g1, g2, &f1, &f2, &count)
    if record:
        history = [f]
    if not (isfinite(f) and isfinite(f1) and isfinite(f2) and _all_finite(g1) and (count == 1 or _all_finite(g2))):
        return np.asarray(c), f, 0, math.nan, STATUS_NONFINITE, history
    D = _direction(f, f1, f2, g1, g2, count, d)
    gn = sqrt(D)
    while True:
        if gn <= grad_tol:
            status = STATUS_CONVERGED
            break
        if it >= max_iters:
            break
        # trial points are evaluated with gradients, so the accepted one needs no second pass
        if fixed_step > 0.0:
            for i in range(n1):
                cn[i] = c[i] + fixed_step * d[i]
            fn = kern.pieces(cn, True, h1, h2, &e1, &e2, &ncount)
            if not isfinite(fn):
                return np.asarray(c), f, it, gn, STATUS_NONFINITE, history
        else:
            a = initial
            ok = False
            for bt in range(MAX_BACKTRACKS):
                for i in range(n1):
                    cn[i] = c[i] + a * d[i]
                fn = kern.pieces(cn, True, h1, h2, &e1, &e2, &ncount)
                if isfinite(fn) and fn < f and fn <= f - c1 * a * D:
                    ok = True
                    break
                a *= shrink
            if not ok:
                status = STATUS_STALLED
                break
        if not (_all_finite(h1) and (ncount == 1 or _all_finite(h2))):
            return np.asarray(c), f, it, gn, STATUS_NONFINITE, history
        tmp = c
        c = cn
        cn = tmp
        tmp = g1
        g1 = h1
        h1 = tmp
        tmp = g2
        g2 = h2
        h2 = tmp
        f, f1, f2, count = fn, e1, e2, ncount
        D = _direction(f, f1, f2, g1, g2, count, d)
        gn = sqrt(D)
        it += 1
        if record:
            history.append(f)
    return np.asarray(c).copy(), f, it, gn, status, history


# --- minimum enclosing circle ------------------------------------------------

cdef struct Circle:
    double x
    double y
    double r
    long i
    long j
    long k
    bint ok


cdef double EPS_MUL = 1.0 + 1e-14


cdef inline bint _inside(Circle c, double x, double y) noexcept nogil:
    return hypot(x - c.x, y - c.y) <= c.r * EPS_MUL


cdef inline double _cross(double ax, double ay, double bx, double by, double cx, double cy) noexcept nogil:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


cdef Circle _diameter(const double[:, ::1] P, long i, long j) noexcept nogil:
    cdef Circle c
    cdef double ax = P[i, 0], ay = P[i, 1], bx = P[j, 0], by = P[j, 1]
    c.x = (ax + bx) / 2.0
    c.y = (ay + by) / 2.0
    c.r = max(hypot(c.x - ax, c.y - ay), hypot(c.x - bx, c.y - by))
    c.i = i
    c.j = j
    c.k = -1
    c.ok = True
    return c


cdef Circle _circumcircle(const double[:, ::1] P, long i, long j, long k) noexcept nogil:
    cdef Circle c
    cdef double ax = P[i, 0], ay = P[i, 1], bx = P[j, 0], by = P[j, 1], cx = P[k, 0], cy = P[k, 1]
    cdef double ox = (min(ax, bx, cx) + max(ax, bx, cx)) / 2.0
    cdef double oy = (min(ay, by, cy) + max(ay, by, cy)) / 2.0
    cdef double d, a2, b2, c2, x, y
    ax -= ox
    ay -= oy
    bx -= ox
    by -= oy
    cx -= ox
    cy -= oy
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0
    c.ok = d != 0.0
    if not c.ok:
        return c
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    x = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    y = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    c.r = max(hypot(x - ax, y - ay), hypot(x - bx, y - by), hypot(x - cx, y - cy))
    c.x = x + ox
    c.y = y + oy
    c.i = i
    c.j = j
    c.k = k
    return c


cdef Circle _two_points(const double[:, ::1] P, long end, long i, long j) noexcept nogil:
    cdef Circle circ = _diameter(P, i, j), left, right, c
    cdef bint has_left = False, has_right = False
    cdef double px = P[i, 0], py = P[i, 1], qx = P[j, 0], qy = P[j, 1], cross, cc
    cdef long k
    for k in range(end):
        if _inside(circ, P[k, 0], P[k, 1]):
            continue
        cross = _cross(px, py, qx, qy, P[k, 0], P[k, 1])
        c = _circumcircle(P, i, j, k)
        if not c.ok:
            continue
        cc = _cross(px, py, qx, qy, c.x, c.y)
        if cross > 0.0 and (not has_left or cc > _cross(px, py, qx, qy, left.x, left.y)):
            left = c
            has_left = True
        elif cross < 0.0 and (not has_right or cc < _cross(px, py, qx, qy, right.x, right.y)):
            right = c
            has_right = True
    if not has_left and not has_right:
        return circ
    if not has_left:
        return right
    if not has_right:
        return left
    return left if left.r <= right.r else right


cdef Circle _one_point(const double[:, ::1] P, long end, long i) noexcept nogil:
    cdef Circle c
    cdef long j
    c.x = P[i, 0]
    c.y = P[i, 1]
    c.r = 0.0
    c.i = i
    c.j = -1
    c.k = -1
    c.ok = True
    for j in range(end):
        if not _inside(c, P[j, 0], P[j, 1]):
            if c.r == 0.0:
                c = _diameter(P, i, j)
            else:
                c = _two_points(P, j + 1, i, j)
    return c


def meb(points):
    """Smallest enclosing circle of an (n, 2) array, processed in the given order."""
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef long n = P.shape[0], i
    cdef Circle c
    cdef bint have = False
    if n == 0:
        return None
    with nogil:
        for i in range(n):
            if not have or not _inside(c, P[i, 0], P[i, 1]):
                c = _one_point(P, i + 1, i)
                have = True
    return (c.x, c.y, c.r, c.i, c.j, c.k)
