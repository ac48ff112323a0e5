"""Composite problem container and objective/gradient utilities.

A problem is the sum of ``num_components`` smooth convex pieces plus one
(possibly nonsmooth) regularizer accessed only through its proximal map.
Everything downstream (solver, certificates, verifiers) works against this
container, so generators for concrete instances only have to fill in the
callables and the metadata (per-component gradient Lipschitz constants and,
when known, the quadratic-growth modulus and the optimum).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Array = np.ndarray


class NumericError(RuntimeError):
    """A non-finite quantity appeared; carries the iteration index."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class DivergenceError(NumericError):
    """Objective blew past the divergence guard."""


@dataclass
class CompositeProblem:
    """Finite-sum objective F(x) = sum_n f_n(x) plus regularizer h(x).

    Parameters
    ----------
    dimension : ambient dimension d.
    num_components : number N of smooth pieces.
    component_gradient : callable (n, x) -> gradient of f_n at x, length d.
    smooth_value : callable x -> F(x).
    regularizer_value : callable x -> h(x), may return inf outside the domain.
    prox : callable (v, alpha) -> argmin_z h(z) + ||z - v||^2 / (2 alpha).
    component_lipschitz : length-N array of gradient Lipschitz constants L_n.
    growth_constant : quadratic-growth modulus beta, or None when unknown.
    known_optimum : optional (x_star, phi_star) pair.
    block_gradient : optional callable (indices, x) -> sum of component
        gradients over ``indices``; used as a fast path by the solver.
    total_lipschitz : L = sum of component_lipschitz; computed when omitted
        and checked against the component sum when supplied.
    """

    dimension: int
    num_components: int
    component_gradient: Callable[[int, Array], Array]
    smooth_value: Callable[[Array], float]
    regularizer_value: Callable[[Array], float]
    prox: Callable[[Array, float], Array]
    component_lipschitz: Array
    growth_constant: Optional[float] = None
    known_optimum: Optional[tuple[Array, float]] = None
    block_gradient: Optional[Callable[[Array, Array], Array]] = None
    total_lipschitz: Optional[float] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if self.num_components < 1:
            raise ValueError("num_components must be at least 1")
        self.component_lipschitz = np.asarray(self.component_lipschitz, dtype=float)
        if self.component_lipschitz.shape != (self.num_components,):
            raise ValueError("component_lipschitz must have one entry per component")
        if not np.all(self.component_lipschitz > 0):
            raise ValueError("component Lipschitz constants must be positive")
        total = float(np.sum(self.component_lipschitz))
        if self.total_lipschitz is None:
            self.total_lipschitz = total
        elif self.total_lipschitz != total:
            raise ValueError("total_lipschitz must equal the sum of component_lipschitz")
        if self.growth_constant is not None and not self.growth_constant > 0:
            raise ValueError("growth_constant must be positive when given")
        if self.known_optimum is not None:
            x_star, phi_star = self.known_optimum
            x_star = np.asarray(x_star, dtype=float)
            if x_star.shape != (self.dimension,):
                raise ValueError("known optimum has the wrong dimension")
            self.known_optimum = (x_star, float(phi_star))

    def sum_block_gradient(self, indices: Array, x: Array) -> Array:
        """Sum of component gradients over ``indices`` (fast path if present)."""
        if self.block_gradient is not None:
            return self.block_gradient(indices, x)
        g = np.zeros(self.dimension)
        for n in indices:
            g += self.component_gradient(int(n), x)
        return g


@dataclass
class IterateState:
    """One step of solver state: current/previous main and prox iterates."""

    k: int
    x_curr: Array
    x_prev: Array
    z_curr: Array
    z_prev: Array
    y_curr: Array

    @classmethod
    def initial(cls, x0: Array) -> "IterateState":
        x0 = np.asarray(x0, dtype=float)
        return cls(
            k=0,
            x_curr=x0.copy(),
            x_prev=x0.copy(),
            z_curr=x0.copy(),
            z_prev=x0.copy(),
            y_curr=x0.copy(),
        )


def _check_point(problem: CompositeProblem, x: Array) -> Array:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dimension,):
        raise ValueError(
            f"point has shape {x.shape}, expected ({problem.dimension},)"
        )
    return x


def evaluate_objective(problem: CompositeProblem, x: Array) -> float:
    """Full objective F(x) + h(x); +inf propagates from the regularizer."""
    x = _check_point(problem, x)
    h = float(problem.regularizer_value(x))
    if math.isinf(h):
        return math.inf
    return float(problem.smooth_value(x)) + h


def full_gradient(problem: CompositeProblem, x: Array) -> Array:
    """Sum of all component gradients, accumulated in component order."""
    x = _check_point(problem, x)
    g = np.zeros(problem.dimension)
    for n in range(problem.num_components):
        g += problem.component_gradient(n, x)
    return g


def gradient_consistency_check(
    problem: CompositeProblem, x: Array, step: float = 1e-6
) -> float:
    """Max abs deviation of central differences of F from the summed gradient.

    Normalized by (1 + max abs gradient entry) so the return value is
    comparable across problem scales.
    """
    x = _check_point(problem, x)
    if not step > 0:
        raise ValueError("step must be positive")
    g = full_gradient(problem, x)
    fd = np.empty(problem.dimension)
    for i in range(problem.dimension):
        e = np.zeros(problem.dimension)
        e[i] = step
        fd[i] = (problem.smooth_value(x + e) - problem.smooth_value(x - e)) / (2 * step)
    denom = 1.0 + float(np.max(np.abs(g))) if g.size else 1.0
    return float(np.max(np.abs(fd - g))) / denom


# ---------------------------------------------------------------------------
# JSON problem documents
#
# Schema (all floats plain JSON numbers):
#   {
#     "dimension": int,
#     "num_components": int,
#     "generator": {"name": str, "params": {...}, "seed": int | null},
#     "L_n": [float, ...],
#     "beta": float | null,
#     "prox": {"kind": str, "lambda": float},
#     "known_optimum": {"x": [...], "phi": float} | null
#   }
# ---------------------------------------------------------------------------

def problem_to_document(
    problem: CompositeProblem,
    generator: dict,
    prox_spec: dict,
) -> dict:
    """Serializable metadata document for a generated problem."""
    opt = None
    if problem.known_optimum is not None:
        x_star, phi_star = problem.known_optimum
        opt = {"x": [float(v) for v in x_star], "phi": float(phi_star)}
    return {
        "dimension": problem.dimension,
        "num_components": problem.num_components,
        "generator": generator,
        "L_n": [float(v) for v in problem.component_lipschitz],
        "beta": None if problem.growth_constant is None else float(problem.growth_constant),
        "prox": dict(prox_spec),
        "known_optimum": opt,
    }


def problem_from_document(doc: dict) -> CompositeProblem:
    """Rebuild a problem from its document via the generator registry.

    The generator is re-run from its recorded params/seed; serialized
    metadata, when present, is checked against the rebuilt instance.
    """
    from . import problems  # deferred to avoid an import cycle

    gen = doc.get("generator")
    if not isinstance(gen, dict) or "name" not in gen:
        raise ValueError("document lacks a generator block")
    problem = problems.build_from_generator(
        gen["name"], gen.get("params", {}), gen.get("seed")
    )
    if "dimension" in doc and doc["dimension"] != problem.dimension:
        raise ValueError("document dimension does not match the generator output")
    if "num_components" in doc and doc["num_components"] != problem.num_components:
        raise ValueError("document num_components does not match the generator output")
    if doc.get("L_n") is not None:
        ln = np.asarray(doc["L_n"], dtype=float)
        if ln.shape != problem.component_lipschitz.shape or not np.allclose(
            ln, problem.component_lipschitz, rtol=1e-12, atol=0.0
        ):
            raise ValueError("document L_n does not match the generator output")
    if doc.get("beta") is not None:
        if problem.growth_constant is None:
            problem.growth_constant = float(doc["beta"])
        elif not math.isclose(doc["beta"], problem.growth_constant, rel_tol=1e-12):
            raise ValueError("document beta does not match the generator output")
    return problem


def load_problem(path: str) -> CompositeProblem:
    """Read a problem document from a JSON file and rebuild it."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return problem_from_document(doc)
