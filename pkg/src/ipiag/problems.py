"""Built-in problem generators.

Two families:

``toy``    a chain-coupled quadratic over the nonnegative orthant with an
           l1 penalty.  Everything about it is closed form: the summed
           gradient is diagonal, the growth modulus is 2, and the unique
           minimizer sits on the first coordinate axis.

``lasso``  least squares rows plus an l1 penalty, with data drawn
           deterministically from the counter-based generator so the same
           seed yields the same instance everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Array, CompositeProblem, problem_to_document
from .prox import ProxSpec
from .rng import SplitMix64
from .schedules import schedule_synchronous
from .solver import SolverParams, run


@dataclass(frozen=True)
class ToySpec:
    """Chain-coupled quadratic: N components over N coordinates."""

    num_components: int
    offset: float = 3.0
    l1_weight: float = 1.0
    num_workers: int = 4

    def __post_init__(self):
        if self.num_components < 2:
            raise ValueError("need at least two components")
        if not self.offset > 0:
            raise ValueError("offset must be positive")
        if self.l1_weight < 0:
            raise ValueError("l1_weight must be nonnegative")
        if not 1 <= self.num_workers <= self.num_components:
            raise ValueError("num_workers must lie in [1, num_components]")


def make_toy(spec: ToySpec) -> CompositeProblem:
    """Build the chain-coupled quadratic test problem.

    Component n (0-based) touches coordinates n-1, n, n+1:

        f_0 = (x_0 - c)^2 + (x_1 + c)^2 / 2
        f_n = ((x_{n-1} + c)^2 + (x_n - c)^2 + (x_{n+1} + c)^2) / 2
        f_{N-1} = ((x_{N-2} + c)^2 + (x_{N-1} - c)^2) / 2

    with h(x) = l1_weight * ||x||_1 plus the nonnegativity indicator.  The
    summed gradient is diagonal: 3 x_0 - c on the first coordinate,
    3 x_j + c inside, 2 x_{N-1} at the end, so the minimizer is
    max(0, c - l1_weight) / 3 on coordinate 0 and zero elsewhere.
    """
    n = spec.num_components
    c = spec.offset
    prox_spec = ProxSpec("nonneg_l1", spec.l1_weight)

    def smooth_value(x: Array) -> float:
        x = np.asarray(x, dtype=float)
        self_sq = (x[0] - c) ** 2 + 0.5 * np.sum((x[1:] - c) ** 2)
        left_sq = 0.5 * np.sum((x[:-1] + c) ** 2)
        right_sq = 0.5 * np.sum((x[1:] + c) ** 2)
        return float(self_sq + left_sq + right_sq)

    def component_gradient(j: int, x: Array) -> Array:
        g = np.zeros(n)
        if j == 0:
            g[0] = 2.0 * (x[0] - c)
            g[1] = x[1] + c
        elif j == n - 1:
            g[n - 2] = x[n - 2] + c
            g[n - 1] = x[n - 1] - c
        else:
            g[j - 1] = x[j - 1] + c
            g[j] = x[j] - c
            g[j + 1] = x[j + 1] + c
        return g

    def block_gradient(indices: Array, x: Array) -> Array:
        ns = np.asarray(indices, dtype=int)
        g = np.zeros(n)
        if ns.size == 0:
            return g
        if ns[-1] - ns[0] + 1 == ns.size:  # ascending contiguous block
            lo, hi = int(ns[0]), int(ns[-1]) + 1
            g[lo:hi] = x[lo:hi] - c
            if lo == 0:
                g[0] += x[0] - c
            a = max(lo, 1) - 1
            if hi - 1 > a:
                g[a : hi - 1] += x[a : hi - 1] + c
            b2 = min(hi + 1, n)
            if b2 > lo + 1:
                g[lo + 1 : b2] += x[lo + 1 : b2] + c
            return g
        np.add.at(g, ns, x[ns] - c)
        if (ns == 0).any():
            g[0] += x[0] - c
        left = ns[ns >= 1] - 1
        np.add.at(g, left, x[left] + c)
        right = ns[ns <= n - 2] + 1
        np.add.at(g, right, x[right] + c)
        return g

    lipschitz = np.ones(n)
    lipschitz[0] = 2.0

    x_star = np.zeros(n)
    x_star[0] = max(0.0, c - spec.l1_weight) / 3.0
    phi_star = smooth_value(x_star) + prox_spec.value(x_star)

    return CompositeProblem(
        dimension=n,
        num_components=n,
        component_gradient=component_gradient,
        smooth_value=smooth_value,
        regularizer_value=prox_spec.value,
        prox=prox_spec.prox,
        component_lipschitz=lipschitz,
        growth_constant=2.0,
        known_optimum=(x_star, phi_star),
        block_gradient=block_gradient,
    )


def toy_document(spec: ToySpec) -> dict:
    problem = make_toy(spec)
    generator = {
        "name": "toy",
        "params": {
            "num_components": spec.num_components,
            "offset": spec.offset,
            "l1_weight": spec.l1_weight,
            "num_workers": spec.num_workers,
        },
        "seed": None,
    }
    return problem_to_document(problem, generator, ProxSpec("nonneg_l1", spec.l1_weight).to_json())


@dataclass(frozen=True)
class LassoSpec:
    """Row-separable least squares with an l1 penalty."""

    rows: int = 60
    cols: int = 200
    sparsity: float = 0.1
    l1_weight: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be positive")
        if not 0.0 < self.sparsity <= 1.0:
            raise ValueError("sparsity must lie in (0, 1]")
        if self.l1_weight < 0:
            raise ValueError("l1_weight must be nonnegative")


def lasso_arrays(spec: LassoSpec) -> tuple:
    """Deterministic (A, b, x_true) for a spec.

    Draw order from one stream seeded with ``spec.seed``: the rows*cols
    matrix entries, then the support via a partial shuffle, then the
    nonzero values.  b = A @ x_true with no noise, so the planted vector
    attains zero residual.
    """
    rng = SplitMix64(spec.seed)
    a = rng.normals(spec.rows * spec.cols).reshape(spec.rows, spec.cols)
    k = max(1, int(round(spec.sparsity * spec.cols)))
    support = rng.shuffle_prefix(spec.cols, k)
    x_true = np.zeros(spec.cols)
    x_true[support] = rng.normals(k)
    b = a @ x_true
    return a, b, x_true


def _contiguous_slice(indices: Array):
    ns = np.asarray(indices)
    if ns.size and ns[-1] - ns[0] + 1 == ns.size:
        return slice(int(ns[0]), int(ns[-1]) + 1)
    return None


def make_lasso(spec: LassoSpec, growth_constant=None) -> CompositeProblem:
    """Least-squares components f_i = (a_i . x - b_i)^2 / 2, h = l1.

    The growth modulus is not computed from the data; certificates and
    envelope checks need ``growth_constant`` passed explicitly.
    """
    a, b, _ = lasso_arrays(spec)
    prox_spec = ProxSpec("l1", spec.l1_weight)
    lipschitz = np.sum(a * a, axis=1)

    def smooth_value(x: Array) -> float:
        r = a @ x - b
        return 0.5 * float(r @ r)

    def component_gradient(i: int, x: Array) -> Array:
        return (a[i] @ x - b[i]) * a[i]

    def block_gradient(indices: Array, x: Array) -> Array:
        sl = _contiguous_slice(indices)
        rows = a[sl] if sl is not None else a[np.asarray(indices, dtype=int)]
        rhs = b[sl] if sl is not None else b[np.asarray(indices, dtype=int)]
        return rows.T @ (rows @ x - rhs)

    return CompositeProblem(
        dimension=spec.cols,
        num_components=spec.rows,
        component_gradient=component_gradient,
        smooth_value=smooth_value,
        regularizer_value=prox_spec.value,
        prox=prox_spec.prox,
        component_lipschitz=lipschitz,
        growth_constant=growth_constant,
        block_gradient=block_gradient,
    )


def lasso_document(spec: LassoSpec, growth_constant=None) -> dict:
    problem = make_lasso(spec, growth_constant=growth_constant)
    generator = {
        "name": "lasso",
        "params": {
            "rows": spec.rows,
            "cols": spec.cols,
            "sparsity": spec.sparsity,
            "l1_weight": spec.l1_weight,
        },
        "seed": spec.seed,
    }
    return problem_to_document(problem, generator, ProxSpec("l1", spec.l1_weight).to_json())


def spectral_norm_sq(a: Array) -> float:
    """Largest eigenvalue of A^T A (squared spectral norm of A)."""
    a = np.asarray(a, dtype=float)
    gram = a @ a.T if a.shape[0] <= a.shape[1] else a.T @ a
    return float(np.linalg.eigvalsh(gram)[-1])


def reference_solution(
    problem: CompositeProblem,
    alpha: float,
    max_iters: int = 200000,
    tol: float = 1e-10,
) -> tuple:
    """High-accuracy solution via the synchronous method without inertia.

    Runs with a single always-fresh worker until the step norm drops below
    ``tol``.  Returns (x_ref, phi_ref).
    """
    params = SolverParams(alpha=alpha, max_iters=max_iters, stop_tolerance=tol)
    schedule = schedule_synchronous(1, max_iters)
    trace = run(
        problem,
        params,
        schedule,
        np.zeros(problem.dimension),
        store_iterates=False,
    )
    return trace.z_final, float(trace.phi[-1])


_GENERATORS = {}


def build_from_generator(name: str, params: dict, seed=None) -> CompositeProblem:
    """Registry dispatch used when rebuilding problems from documents."""
    if name == "toy":
        return make_toy(ToySpec(**params))
    if name == "lasso":
        merged = dict(params)
        if seed is not None:
            merged.setdefault("seed", seed)
        return make_lasso(LassoSpec(**merged))
    if name in _GENERATORS:
        return _GENERATORS[name](params, seed)
    raise ValueError(f"unknown problem generator {name!r}")
