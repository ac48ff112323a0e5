"""Independent reference implementations used only by the tests.

Nothing here imports solver internals beyond problem closures; values are
recomputed from first principles so that agreement is meaningful.
"""

import numpy as np


def brute_prox_1d(h, v, alpha, span=None, coarse=1e-2, refine_tol=1e-10):
    """Minimize h(z) + (z - v)^2 / (2 alpha) for scalar z by search.

    Coarse grid scan followed by ternary refinement on the bracketing
    interval; h must be convex so the objective is unimodal.  ``span``
    widens the default search interval [min(v,0)-1, max(v,0)+1].
    """
    lo = min(v, 0.0) - 1.0
    hi = max(v, 0.0) + 1.0
    if span is not None:
        lo, hi = lo - span, hi + span

    def obj(z):
        return h(z) + (z - v) ** 2 / (2.0 * alpha)

    grid = np.arange(lo, hi + coarse, coarse)
    vals = np.array([obj(z) for z in grid])
    i = int(np.argmin(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    while b - a > refine_tol:
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if obj(m1) <= obj(m2):
            b = m2
        else:
            a = m1
    return (a + b) / 2.0


def l1_scalar(weight):
    return lambda z: weight * abs(z)


def nonneg_l1_scalar(weight):
    return lambda z: weight * z if z >= 0 else float("inf")


def toy_aggregated_gradient(x, c):
    """Closed-form summed gradient of the chain-coupled quadratic.

    Worked out by adding the per-component stencils: the cross terms
    telescope, leaving a diagonal map 3 x_0 - c, 3 x_j + c inside, and
    2 x_last at the end.
    """
    x = np.asarray(x, dtype=float)
    g = 3.0 * x + c
    g[0] = 3.0 * x[0] - c
    g[-1] = 2.0 * x[-1]
    return g


def toy_prox_grad_reference(x0, c, l1_weight, alpha, iters):
    """Plain proximal-gradient iterates on the toy objective.

    Uses the closed-form aggregated gradient above and the closed-form
    prox of l1-plus-nonnegativity, nothing from the package.
    """
    x = np.asarray(x0, dtype=float).copy()
    out = [x.copy()]
    for _ in range(iters):
        v = x - alpha * toy_aggregated_gradient(x, c)
        x = np.maximum(v - alpha * l1_weight, 0.0)
        out.append(x.copy())
    return np.array(out)


def central_difference_gradient(f, x, step=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g
