"""Pure-Python/numpy kernels. Reference semantics for ``_kernels.pyx``.

A Sobolev problem is the tuple
``(widths, site_k, site_t, w, xi, wq, tau, alpha, mu, beta, p, radius)``
describing ``tau*||lambda(g) - w||^alpha + mu*(||g||_W/radius)^beta`` for
``g`` with nodal coefficients ``c``.
"""
from __future__ import annotations

import math

import numpy as np

NAME = "python"

TIE_TOL = 1e-12
MAX_BACKTRACKS = 60

STATUS_CONVERGED = 0
STATUS_MAX_ITERS = 1
STATUS_STALLED = 2
STATUS_NONFINITE = 3


def _max_abs(v: np.ndarray, want_grad: bool):
    a = np.abs(v)
    top = float(a.max())
    if not want_grad:
        return top, None
    if top == 0.0:
        return top, np.zeros_like(v)
    active = a >= top - TIE_TOL
    return top, np.where(active, np.sign(v), 0.0) / np.count_nonzero(active)


def abs_power_integrals(a, b, p, xi, wq, want_grad=False):
    """Per-interval ``int_0^1 |a(1-t) + bt|^p dt`` and its partials in ``a`` and ``b``.

    Gauss-Legendre on intervals where the linear function keeps its sign;
    where it crosses zero the integrand has a kink, so the closed form
    ``(|a|^(p+1) + |b|^(p+1)) / ((p+1)(|a| + |b|))`` is used instead.
    """
    V = np.outer(a, 1.0 - xi) + np.outer(b, xi)
    absV = np.abs(V)
    T = absV ** (p - 1.0)
    integral = (T * absV) @ wq
    cross = ((a <= 0.0) & (b >= 0.0)) | ((a >= 0.0) & (b <= 0.0))
    A, B = np.abs(a[cross]), np.abs(b[cross])
    D = A + B
    safe = np.where(D > 0.0, D, 1.0)
    Ic = np.where(D > 0.0, (A ** (p + 1.0) + B ** (p + 1.0)) / ((p + 1.0) * safe), 0.0)
    integral[cross] = Ic
    if not want_grad:
        return integral, None, None
    TS = T * np.sign(V)
    da = p * (TS @ (wq * (1.0 - xi)))
    db = p * (TS @ (wq * xi))
    ac, bc = a[cross], b[cross]
    sa = np.where(ac != 0.0, np.sign(ac), -np.sign(bc))
    sb = np.where(bc != 0.0, np.sign(bc), -np.sign(ac))
    da[cross] = np.where(D > 0.0, sa * (A ** p - Ic) / safe, 0.0)
    db[cross] = np.where(D > 0.0, sb * (B ** p - Ic) / safe, 0.0)
    return integral, da, db


def w1_parts(c, widths, xi, wq, p, want_grad=True):
    """``(||g||_p, ||g'||_p, grad of the first, grad of the second)``."""
    n1 = c.size
    s = np.diff(c) / widths
    a, b = c[:-1], c[1:]
    # derivative branch
    if math.isinf(p):
        S, gs = _max_abs(s, want_grad)
        if want_grad:
            gs = gs / widths
            gsem = np.zeros(n1)
            gsem[:-1] -= gs
            gsem[1:] += gs
    else:
        abs_s = np.abs(s)
        S = float(np.sum(abs_s ** p * widths) ** (1.0 / p))
        if want_grad:
            gsem = np.zeros(n1)
            if S > 0.0:
                coef = S ** (1.0 - p) * abs_s ** (p - 1.0) * np.sign(s)
                gsem[:-1] -= coef
                gsem[1:] += coef
    # value branch
    if math.isinf(p):
        L, glp = _max_abs(c, want_grad)
    elif p == 2.0:
        L = float(math.sqrt(float(np.sum(widths * (a * a + a * b + b * b))) / 3.0))
        if want_grad:
            glp = np.zeros(n1)
            if L > 0.0:
                glp[:-1] += widths * (2.0 * a + b) / (6.0 * L)
                glp[1:] += widths * (a + 2.0 * b) / (6.0 * L)
    else:
        I, da, db = abs_power_integrals(a, b, p, xi, wq, want_grad)
        L = float(np.sum(I * widths) ** (1.0 / p))
        if want_grad:
            glp = np.zeros(n1)
            if L > 0.0:
                coef = (L ** (1.0 - p) / p) * widths
                glp[:-1] += coef * da
                glp[1:] += coef * db
    if not want_grad:
        glp = gsem = None
    return L, S, glp, gsem


def w1_norm(c, widths, xi, wq, p, want_grad=True):
    """max(||g||_p, ||g'||_p) and a subgradient with respect to ``c``."""
    L, S, glp, gsem = w1_parts(c, widths, xi, wq, p, want_grad)
    if abs(L - S) < TIE_TOL:
        return max(L, S), (0.5 * (glp + gsem) if want_grad else None)
    if L > S:
        return L, (glp if want_grad else None)
    return S, (gsem if want_grad else None)


def _data_part(c, prob, want_grad):
    widths, sk, st, w, xi, wq, tau, alpha, mu, beta, p, radius = prob
    m = w.size
    r = (1.0 - st) * c[sk] + st * c[sk + 1] - w
    R = math.sqrt(float(np.dot(r, r)) / m)
    data = R ** alpha
    if not want_grad:
        return data, None
    grad = np.zeros(c.size)
    if R > 0.0:
        coef = 2.0 / m if alpha == 2.0 else alpha * R ** (alpha - 2.0) / m
        gr = tau * coef * r
        grad += np.bincount(sk, (1.0 - st) * gr, minlength=c.size)
        grad += np.bincount(sk + 1, st * gr, minlength=c.size)
    return data, grad


def _penalty_scale(N, mu, beta, radius):
    return mu * beta * N ** (beta - 1.0) / radius if N > 0.0 and mu != 0.0 else 0.0


def sobolev_eval(c, prob, want_grad=True):
    """Return ``(loss, data_term, penalty_term, grad_or_None)``."""
    widths, sk, st, w, xi, wq, tau, alpha, mu, beta, p, radius = prob
    data, grad = _data_part(c, prob, want_grad)
    N, gN = w1_norm(c, widths, xi, wq, p, want_grad)
    N = N / radius
    pen = N ** beta
    loss = tau * data + mu * pen
    if want_grad:
        scale = _penalty_scale(N, mu, beta, radius)
        if scale != 0.0:
            grad += scale * gN
    return loss, data, pen, grad


def sobolev_pieces(c, prob, want_grad=True):
    """The loss as a max of two smooth pieces, one per branch of the Sobolev norm.

    Returns ``(loss, pieces)`` with ``pieces`` a list of ``(value, grad)``;
    one piece when ``mu == 0``. ``pieces`` is None without ``want_grad``.
    """
    widths, sk, st, w, xi, wq, tau, alpha, mu, beta, p, radius = prob
    data, gdata = _data_part(c, prob, want_grad)
    if mu == 0.0:
        loss = tau * data
        return loss, ([(loss, gdata)] if want_grad else None)
    L, S, glp, gsem = w1_parts(c, widths, xi, wq, p, want_grad)
    fL = tau * data + mu * (L / radius) ** beta
    fS = tau * data + mu * (S / radius) ** beta
    loss = max(fL, fS)
    if not want_grad:
        return loss, None
    g1 = gdata + _penalty_scale(L / radius, mu, beta, radius) * glp
    g2 = gdata + _penalty_scale(S / radius, mu, beta, radius) * gsem
    return loss, [(fL, g1), (fS, g2)]


def minimax_direction(f, pieces):
    """Search direction and predicted decrease for ``max_i f_i`` at the current point.

    Minimizes ``max_i [f_i - f + g_i.d] + |d|^2 / 2``. Its dual picks the
    convex combination ``theta`` of the piece gradients, and ``d`` is minus
    that combination. The decrease measure ``D = |d|^2 - sum theta_i (f_i - f)``
    equals ``|g|^2`` for a single smooth piece.
    """
    if len(pieces) == 1:
        g = pieces[0][1]
        return -g, float(np.dot(g, g))
    (f1, g1), (f2, g2) = pieces
    d1, d2 = f1 - f, f2 - f
    u = g1 - g2
    uu = float(np.dot(u, u))
    if uu > 0.0:
        theta = min(1.0, max(0.0, (d1 - d2 - float(np.dot(u, g2))) / uu))
    else:
        theta = 1.0 if d1 >= d2 else 0.0
    g = g2 + theta * u
    D = float(np.dot(g, g)) - theta * d1 - (1.0 - theta) * d2
    return -g, max(D, 0.0)


def armijo_descent(fun, c0, max_iters, grad_tol, c1=1e-4, shrink=0.5, initial=1.0,
                   fixed_step=0.0, record=False):
    """Descent with Armijo backtracking (or a fixed step if ``fixed_step > 0``).

    ``fun(c, want_grad)`` returns ``(value, pieces)`` where ``pieces`` is a
    list of ``(value_i, grad_i)`` whose maximum is the objective near ``c``
    (a single ``(value, grad)`` for an ordinary function). The step follows
    :func:`minimax_direction`, so this is gradient descent away from ties
    between pieces. Returns ``(c, value, iterations, measure, status, history)``
    where ``measure = sqrt(D)`` is the stationarity measure (the gradient norm
    for a smooth objective), ``status`` is a ``STATUS_*`` code and
    ``history`` holds accepted loss values when ``record`` is set.
    """
    def finite(pieces):
        return all(math.isfinite(v) and np.all(np.isfinite(g)) for v, g in pieces)

    c = np.array(c0, dtype=float)
    f, pieces = fun(c, True)
    history = [f] if record else None
    if not (math.isfinite(f) and finite(pieces)):
        return c, f, 0, math.nan, STATUS_NONFINITE, history
    d, D = minimax_direction(f, pieces)
    gn = math.sqrt(D)
    it = 0
    status = STATUS_MAX_ITERS
    while True:
        if gn <= grad_tol:
            status = STATUS_CONVERGED
            break
        if it >= max_iters:
            break
        if fixed_step > 0.0:
            cn = c + fixed_step * d
            fn, _ = fun(cn, False)
            if not math.isfinite(fn):
                return c, f, it, gn, STATUS_NONFINITE, history
        else:
            a = initial
            for _ in range(MAX_BACKTRACKS):
                cn = c + a * d
                fn, _ = fun(cn, False)
                if math.isfinite(fn) and fn < f and fn <= f - c1 * a * D:
                    break
                a *= shrink
            else:
                status = STATUS_STALLED
                break
        fn, pieces = fun(cn, True)
        if not finite(pieces):
            return c, f, it, gn, STATUS_NONFINITE, history
        c, f = cn, fn
        d, D = minimax_direction(f, pieces)
        gn = math.sqrt(D)
        it += 1
        if record:
            history.append(f)
    return c, f, it, gn, status, history


def sobolev_descent(c0, prob, max_iters, grad_tol, c1=1e-4, shrink=0.5, initial=1.0,
                    fixed_step=0.0, record=False):
    return armijo_descent(lambda c, want_grad: sobolev_pieces(c, prob, want_grad), c0, max_iters, grad_tol,
                          c1, shrink, initial, fixed_step, record)


# --- minimum enclosing circle: randomized incremental algorithm --------------

_EPS = 1 + 1e-14


def _inside(c, x, y):
    return math.hypot(x - c[0], y - c[1]) <= c[2] * _EPS


def _diameter(P, i, j):
    ax, ay = P[i]
    bx, by = P[j]
    cx, cy = (ax + bx) / 2.0, (ay + by) / 2.0
    return (cx, cy, max(math.hypot(cx - ax, cy - ay), math.hypot(cx - bx, cy - by)), i, j, -1)


def _circumcircle(P, i, j, k):
    (ax, ay), (bx, by), (cx, cy) = P[i], P[j], P[k]
    ox = (min(ax, bx, cx) + max(ax, bx, cx)) / 2.0
    oy = (min(ay, by, cy) + max(ay, by, cy)) / 2.0
    ax -= ox; ay -= oy; bx -= ox; by -= oy; cx -= ox; cy -= oy  # noqa: E702
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0
    if d == 0.0:
        return None
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    x = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    y = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    r = max(math.hypot(x - ax, y - ay), math.hypot(x - bx, y - by), math.hypot(x - cx, y - cy))
    return (x + ox, y + oy, r, i, j, k)


def _cross(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _two_points(P, end, i, j):
    circ = _diameter(P, i, j)
    left = right = None
    px, py = P[i]
    qx, qy = P[j]
    for k in range(end):
        x, y = P[k]
        if _inside(circ, x, y):
            continue
        cross = _cross(px, py, qx, qy, x, y)
        c = _circumcircle(P, i, j, k)
        if c is None:
            continue
        cc = _cross(px, py, qx, qy, c[0], c[1])
        if cross > 0.0 and (left is None or cc > _cross(px, py, qx, qy, left[0], left[1])):
            left = c
        elif cross < 0.0 and (right is None or cc < _cross(px, py, qx, qy, right[0], right[1])):
            right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left[2] <= right[2] else right


def _one_point(P, end, i):
    c = (P[i][0], P[i][1], 0.0, i, -1, -1)
    for j in range(end):
        x, y = P[j]
        if not _inside(c, x, y):
            c = _diameter(P, i, j) if c[2] == 0.0 else _two_points(P, j + 1, i, j)
    return c


def meb(points):
    """Smallest enclosing circle of an (n, 2) array, processed in the given order.

    Returns ``(cx, cy, r, i, j, k)`` where ``i, j, k`` index the support
    points (-1 when unused).
    """
    P = [(float(x), float(y)) for x, y in np.asarray(points, dtype=float)]
    c = None
    for i, (x, y) in enumerate(P):
        if c is None or not _inside(c, x, y):
            c = _one_point(P, i + 1, i)
    return c
