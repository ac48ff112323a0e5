"""Step-size certificates and linear-rate verification.

A certificate packages, for one solver variant, the largest admissible step
size, the inertial weights derived from it, and the contraction factor rho
of the Lyapunov value

    Psi(z) = Phi(z) - Phi* + (1 - eta1) / (2 alpha) * dist(z, X*)^2.

Variants are named by short tags:

    ``t1``       both inertial terms, stated step-size threshold
    ``t1tight``  same, with the sharper threshold exponent
    ``cor1``     pre-prox inertia only (eta2 = 0)
    ``cor2``     post-prox inertia only (eta1 = 0)

The underlying contraction argument reduces to scalar recurrences on the
Lyapunov sequence; the one-term and two-term recurrence verifiers below
check those arguments directly on data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Array, CompositeProblem, evaluate_objective
from .solver import Trace

VARIANTS = ("t1", "t1tight", "cor1", "cor2")


@dataclass(frozen=True)
class RateInputs:
    """Problem constants a certificate is computed from."""

    total_lipschitz: float
    growth_constant: float
    delay: int
    momentum_fraction: float = 0.0  # C1, weight of the pre-prox inertia

    def __post_init__(self):
        if not self.total_lipschitz > 0:
            raise ValueError("total_lipschitz must be positive")
        if not self.growth_constant > 0:
            raise ValueError("growth_constant must be positive")
        if self.delay < 0:
            raise ValueError("delay must be nonnegative")
        if not 0.0 <= self.momentum_fraction < 1.0:
            raise ValueError("momentum_fraction must lie in [0, 1)")


@dataclass
class RateCertificate:
    """Admissible step size, inertial weights, and contraction factor."""

    variant: str
    inputs: RateInputs
    alpha_max: float
    alpha: float
    eta1: float
    eta2_max: float
    eta2: float
    rho: float
    admissible: bool
    simplified_factor: Optional[float] = None
    lyapunov_constant: Optional[float] = None

    def to_json_dict(self) -> dict:
        doc = {
            "variant": self.variant,
            "L": self.inputs.total_lipschitz,
            "beta": self.inputs.growth_constant,
            "tau": self.inputs.delay,
            "C1": self.inputs.momentum_fraction,
            "alpha0": self.alpha_max,
            "alpha": self.alpha,
            "eta1": self.eta1,
            "eta2_max": self.eta2_max,
            "eta2": self.eta2,
            "rho": self.rho,
            "C": self.lyapunov_constant,
        }
        if self.simplified_factor is not None:
            doc["simplified_factor"] = self.simplified_factor
        return doc


def _eta2_bracket(alpha: float, L: float, beta: float, tau: int, eta1: float, c1: float) -> float:
    """Largest post-prox weight the contraction argument supports at alpha.

    Comes from feeding the per-step descent inequality into the two-term
    recurrence condition and bounding the inverse-power sum by the
    corresponding power sum of (1 + alpha beta).
    """
    ab = alpha * beta
    if tau >= 1:
        burden = (L * (tau + 2) + 8.0 * c1 * beta) / (2.0 * beta) * ((ab + 1.0) ** (tau + 2) - 1.0)
    else:
        burden = (L + 4.0 * c1 * beta) / beta * ((ab + 1.0) ** 3 - 1.0)
    return (0.25 - burden) / (1.0 + ab - eta1)


def ipiag_certificate(
    inputs: RateInputs,
    tight: bool = False,
    alpha: Optional[float] = None,
    eta2: Optional[float] = None,
) -> RateCertificate:
    """Certificate for the doubly inertial variant.

    ``tight=False`` uses the stated threshold exponent 1/(tau+3); with
    ``tight=True`` the exponent drops to 1/(tau+2) for tau >= 1 (the two
    agree at tau = 0).  eta1 is pinned to min(C1 alpha beta, 1); eta2
    defaults to the largest admissible value.
    """
    L = inputs.total_lipschitz
    beta = inputs.growth_constant
    tau = inputs.delay
    c1 = inputs.momentum_fraction
    if not c1 < 0.5:
        raise ValueError("momentum_fraction must be below 0.5 for this variant")

    W = beta / (16.0 * c1 * beta + 2.0 * L * (tau + 2))
    if tight and tau >= 1:
        alpha_max = ((W + 1.0) ** (1.0 / (tau + 2)) - 1.0) / beta
    else:
        alpha_max = ((W + 1.0) ** (1.0 / (tau + 3)) - 1.0) / beta

    if alpha is None:
        alpha = alpha_max
    admissible = 0.0 < alpha <= alpha_max * (1.0 + 1e-15)

    eta1 = min(c1 * alpha * beta, 1.0)
    eta2_max = max(0.0, min(alpha * beta / 2.0, _eta2_bracket(alpha, L, beta, tau, eta1, c1)))
    if eta2 is None:
        eta2 = eta2_max
    admissible = admissible and 0.0 <= eta2 <= eta2_max * (1.0 + 1e-15)
    admissible = admissible and eta1 + eta2 < alpha * beta

    rho = (1.0 + eta2) / (1.0 + alpha * beta - eta1)
    return RateCertificate(
        variant="t1tight" if tight else "t1",
        inputs=inputs,
        alpha_max=alpha_max,
        alpha=alpha,
        eta1=eta1,
        eta2_max=eta2_max,
        eta2=eta2,
        rho=rho,
        admissible=bool(admissible and rho < 1.0),
    )


def momentum_certificate(
    inputs: RateInputs,
    alpha: Optional[float] = None,
) -> RateCertificate:
    """Certificate for pre-prox inertia alone (eta2 = 0).

    Allows the full weight range C1 in [0, 1) and uses the dedicated
    threshold, which is larger than the doubly inertial one.  Also reports
    the closed-form simplified contraction factor valid at alpha_max.
    """
    L = inputs.total_lipschitz
    beta = inputs.growth_constant
    tau = inputs.delay
    c1 = inputs.momentum_fraction

    base = 1.0 + (1.0 - c1) * beta / (L * (tau + 1) + c1 * beta)
    alpha_max = (base ** (1.0 / (tau + 1)) - 1.0) / ((1.0 - c1) * beta)
    if alpha is None:
        alpha = alpha_max
    admissible = 0.0 < alpha <= alpha_max * (1.0 + 1e-15)

    eta1 = c1 * alpha * beta
    rho = 1.0 / (1.0 + alpha * beta - eta1)
    q = L / beta
    simplified = 1.0 - (1.0 - c1) / ((1.0 + q * (tau + 1)) * (tau + 1))
    return RateCertificate(
        variant="cor1",
        inputs=inputs,
        alpha_max=alpha_max,
        alpha=alpha,
        eta1=eta1,
        eta2_max=0.0,
        eta2=0.0,
        rho=rho,
        admissible=bool(admissible and rho < 1.0),
        simplified_factor=simplified,
    )


def nesterov_certificate(
    inputs: RateInputs,
    alpha: Optional[float] = None,
    eta2: Optional[float] = None,
) -> RateCertificate:
    """Certificate for post-prox inertia alone (eta1 = 0).

    The step-size threshold is open: alpha must stay strictly below
    alpha_max so that the eta2 bracket keeps room.  momentum_fraction is
    ignored (treated as 0).
    """
    L = inputs.total_lipschitz
    beta = inputs.growth_constant
    tau = inputs.delay

    W = beta / (2.0 * L * (tau + 2))
    alpha_max = ((W + 1.0) ** (1.0 / (tau + 2)) - 1.0) / beta
    if alpha is None:
        alpha = alpha_max * 0.999
    admissible = 0.0 < alpha < alpha_max

    ab = alpha * beta
    burden = L * (tau + 2) / (2.0 * beta) * ((ab + 1.0) ** (tau + 2) - 1.0)
    bracket = (0.25 - burden) / (1.0 + ab)
    eta2_max = max(0.0, min(ab / 2.0, bracket))
    if eta2 is None:
        eta2 = eta2_max
    admissible = admissible and 0.0 <= eta2 <= eta2_max * (1.0 + 1e-15)
    admissible = admissible and eta2 < ab

    rho = (1.0 + eta2) / (1.0 + ab)
    return RateCertificate(
        variant="cor2",
        inputs=inputs,
        alpha_max=alpha_max,
        alpha=alpha,
        eta1=0.0,
        eta2_max=eta2_max,
        eta2=eta2,
        rho=rho,
        admissible=bool(admissible and rho < 1.0),
    )


def certificate_for(
    variant: str,
    inputs: RateInputs,
    alpha: Optional[float] = None,
    eta2: Optional[float] = None,
) -> RateCertificate:
    """Dispatch on the variant tag."""
    if variant == "t1":
        return ipiag_certificate(inputs, tight=False, alpha=alpha, eta2=eta2)
    if variant == "t1tight":
        return ipiag_certificate(inputs, tight=True, alpha=alpha, eta2=eta2)
    if variant == "cor1":
        return momentum_certificate(inputs, alpha=alpha)
    if variant == "cor2":
        return nesterov_certificate(inputs, alpha=alpha, eta2=eta2)
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


# ---------------------------------------------------------------------------
# scalar recurrence verifiers


@dataclass(frozen=True)
class TwoTermRecurrence:
    """Coefficients of V_{k+1} <= A V_k + B V_{k-1} - b1 w_k + b2 w_{k-1} + c S_k.

    S_k sums w_j over the trailing window j in [k - k0, k]; terms with
    negative index are dropped.  A two-term linear recurrence with
    nonnegative A, B contracts when A + B < 1; the effective single rate is
    the positive root a of a^2 = A a + B.
    """

    A: float
    B: float
    b1: float
    b2: float
    c: float
    k0: int

    def __post_init__(self):
        if self.A < 0 or self.B < 0:
            raise ValueError("A and B must be nonnegative")
        if self.A == 0 and self.B == 0:
            raise ValueError("degenerate recurrence: A and B are both zero")
        if self.A + self.B >= 1:
            raise ValueError("no contraction: A + B must be below 1")
        if self.b1 <= 0 or self.b2 < 0 or self.c < 0:
            raise ValueError("need b1 > 0, b2 >= 0, c >= 0")
        if self.k0 < 0:
            raise ValueError("window length k0 must be nonnegative")

    @property
    def root(self) -> float:
        return (self.A + math.sqrt(self.A * self.A + 4.0 * self.B)) / 2.0

    def split_weights(self) -> tuple:
        """(A/a, B/a^2): nonnegative weights that sum to one."""
        a = self.root
        return self.A / a, self.B / (a * a)

    def condition(self) -> tuple:
        """(lhs, rhs, ok) of the window-sum admissibility condition."""
        a = self.root
        lhs = self.c * sum(a ** (-j) for j in range(self.k0 + 1))
        rhs = self.b1 - self.b2 / a
        return lhs, rhs, lhs <= rhs


def one_term_condition(a: float, b: float, c: float, k0: int) -> tuple:
    """(lhs, rhs, ok) for V_{k+1} <= a V_k - b w_k + c S_k."""
    if not 0 < a < 1:
        raise ValueError("rate a must lie in (0, 1)")
    lhs = c * sum(a ** (-j) for j in range(k0 + 1))
    return lhs, b, lhs <= b


@dataclass
class RecurrenceReport:
    """Outcome of replaying a recurrence argument on data."""

    condition_lhs: float
    condition_rhs: float
    condition_ok: bool
    data_consistent: bool
    data_max_violation: float
    bound_ok: bool
    bound_first_violation: Optional[int]
    envelope: Array

    @property
    def ok(self) -> bool:
        return self.condition_ok and self.data_consistent and self.bound_ok


def _window_sums(w: Array, k0: int) -> Array:
    """S_k = sum of w_j for j in [k - k0, k], negative indices dropped."""
    cs = np.concatenate(([0.0], np.cumsum(w)))
    n = len(w)
    hi = np.arange(n) + 1
    lo = np.maximum(np.arange(n) - k0, 0)
    return cs[hi] - cs[lo]


def verify_one_term(
    V: Array,
    w: Array,
    a: float,
    b: float,
    c: float,
    k0: int,
    slack: float = 1e-12,
) -> RecurrenceReport:
    """Check data against V_{k+1} <= a V_k - b w_k + c S_k and the decay bound.

    Requires len(w) >= len(V) - 1.  When the admissibility condition holds
    the verified bound is V_k <= a^k V_0.
    """
    V = np.asarray(V, dtype=float)
    w = np.asarray(w, dtype=float)
    n = len(V)
    if n < 2:
        raise ValueError("need at least two sequence values")
    if len(w) < n - 1:
        raise ValueError("w is shorter than the recurrence needs")
    lhs, rhs, cond_ok = one_term_condition(a, b, c, k0)

    S = _window_sums(w, k0)
    rhs_seq = a * V[:-1] - b * w[: n - 1] + c * S[: n - 1]
    scale = 1.0 + np.abs(rhs_seq)
    viol = (V[1:] - rhs_seq) / scale
    data_max = float(viol.max())
    data_ok = bool(data_max <= slack)

    envelope = V[0] * a ** np.arange(n)
    over = V > envelope * (1.0 + 1e-9) + 1e-300
    first = int(np.nonzero(over)[0][0]) if over.any() else None
    return RecurrenceReport(
        condition_lhs=lhs,
        condition_rhs=rhs,
        condition_ok=bool(cond_ok),
        data_consistent=data_ok,
        data_max_violation=data_max,
        bound_ok=first is None,
        bound_first_violation=first,
        envelope=envelope,
    )


def verify_two_term(
    V: Array,
    w: Array,
    rec: TwoTermRecurrence,
    slack: float = 1e-12,
) -> RecurrenceReport:
    """Check data against the two-term recurrence and the decay bound.

    The recurrence needs V_{k-1}, so data consistency is checked from
    k = 1 onward.  When the condition holds the verified bound is

        V_k <= a^{k-1} (V_1 + a V_0 + b1 w_0)   for k >= 1,

    with a the effective rate from ``rec.root``.
    """
    V = np.asarray(V, dtype=float)
    w = np.asarray(w, dtype=float)
    n = len(V)
    if n < 3:
        raise ValueError("need at least three sequence values")
    if len(w) < n - 1:
        raise ValueError("w is shorter than the recurrence needs")
    lhs, rhs, cond_ok = rec.condition()
    a = rec.root

    S = _window_sums(w, rec.k0)
    ks = np.arange(1, n - 1)
    rhs_seq = (
        rec.A * V[ks]
        + rec.B * V[ks - 1]
        - rec.b1 * w[ks]
        + rec.b2 * w[ks - 1]
        + rec.c * S[ks]
    )
    scale = 1.0 + np.abs(rhs_seq)
    viol = (V[ks + 1] - rhs_seq) / scale
    data_max = float(viol.max())
    data_ok = bool(data_max <= slack)

    head = V[1] + a * V[0] + rec.b1 * w[0]
    envelope = np.empty(n)
    envelope[0] = max(V[0], head)  # bound speaks from k = 1 on
    envelope[1:] = head * a ** np.arange(n - 1)
    over = V[1:] > envelope[1:] * (1.0 + 1e-9) + 1e-300
    first = int(np.nonzero(over)[0][0] + 1) if over.any() else None
    return RecurrenceReport(
        condition_lhs=lhs,
        condition_rhs=rhs,
        condition_ok=bool(cond_ok),
        data_consistent=data_ok,
        data_max_violation=data_max,
        bound_ok=first is None,
        bound_first_violation=first,
        envelope=envelope,
    )


# ---------------------------------------------------------------------------
# trace-level checks


def lyapunov_value(
    phi: Array,
    dist2: Array,
    phi_star: float,
    alpha: float,
    eta1: float,
) -> Array:
    """Psi = Phi - Phi* + (1 - eta1) / (2 alpha) * dist^2, elementwise."""
    return (np.asarray(phi) - phi_star) + (1.0 - eta1) / (2.0 * alpha) * np.asarray(dist2)


@dataclass
class BoundReport:
    """Envelope check of a traced run against a certificate."""

    rho: float
    constant: float
    psi_ok: bool
    phi_ok: bool
    dist_ok: bool
    psi_first_violation: Optional[int]
    phi_first_violation: Optional[int]
    dist_first_violation: Optional[int]
    psi_max_ratio: float
    phi_max_ratio: float
    dist_max_ratio: float

    @property
    def ok(self) -> bool:
        return self.psi_ok and self.phi_ok and self.dist_ok


def _envelope_check(values: Array, envelope: Array, slack: float) -> tuple:
    ok_mask = values <= envelope * (1.0 + slack) + 1e-300
    bad = np.nonzero(~ok_mask)[0]
    first = int(bad[0]) if bad.size else None
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(envelope > 0, values / envelope, np.inf)
    return first is None, first, float(np.nanmax(ratio))


def verify_linear_bound(
    trace: Trace,
    cert: RateCertificate,
    slack: float = 1e-8,
) -> BoundReport:
    """Check the geometric envelopes rho^k * C on a traced run.

    C is assembled from the first two records: Psi(z_1) + rho Psi(z_0)
    plus ||z_1 - z_0||^2 / (4 alpha).  Three envelopes are checked with
    relative slack: the Lyapunov value, the objective gap, and the squared
    distance (scaled by 2 alpha / (1 - eta1)).
    """
    if trace.phi_star is None or trace.x_ref is None:
        raise ValueError("trace lacks a reference point / optimal value")
    if trace.records < 2:
        raise ValueError("need at least two records")
    alpha, eta1, rho = cert.alpha, cert.eta1, cert.rho
    psi = lyapunov_value(trace.phi, trace.dist2, trace.phi_star, alpha, eta1)
    constant = float(psi[1] + rho * psi[0] + trace.step_norm2[1] / (4.0 * alpha))

    k = np.arange(trace.records)
    env = constant * rho ** k
    gap = trace.phi - trace.phi_star

    psi_ok, psi_first, psi_ratio = _envelope_check(psi, env, slack)
    phi_ok, phi_first, phi_ratio = _envelope_check(gap, env, slack)
    dist_ok, dist_first, dist_ratio = _envelope_check(
        trace.dist2, (2.0 * alpha / (1.0 - eta1)) * env, slack
    )
    return BoundReport(
        rho=rho,
        constant=constant,
        psi_ok=psi_ok,
        phi_ok=phi_ok,
        dist_ok=dist_ok,
        psi_first_violation=psi_first,
        phi_first_violation=phi_first,
        dist_first_violation=dist_first,
        psi_max_ratio=psi_ratio,
        phi_max_ratio=phi_ratio,
        dist_max_ratio=dist_ratio,
    )


@dataclass
class DescentReport:
    """Residuals of the per-step descent inequality along a trace."""

    residuals: Array
    min_residual: float
    tolerance: float
    first_violation: Optional[int]

    @property
    def ok(self) -> bool:
        return self.first_violation is None


def verify_descent(
    problem: CompositeProblem,
    trace: Trace,
    tau: int,
    x_probe: Array,
    slack: float = 1e-9,
) -> DescentReport:
    """Check the one-step descent inequality at a fixed probe point.

    For every executed step k the inequality bounds Phi(z_{k+1}) by
    Phi(x) plus weighted squared distances to x, minus the fresh squared
    step, plus trailing-window correction terms scaled by the total
    Lipschitz constant and the inertial weights.  Residual = rhs - lhs
    must stay above -slack * (1 + |Phi(x)|).
    """
    if trace.z is None:
        raise ValueError("trace must store iterates (store_iterates=True)")
    x_probe = np.asarray(x_probe, dtype=float)
    phi_x = evaluate_objective(problem, x_probe)
    L = problem.total_lipschitz
    alpha, eta1, eta2 = trace.alpha, trace.eta1, trace.eta2
    n = trace.records
    if n < 2:
        raise ValueError("need at least one executed step")

    d2 = ((trace.z - x_probe) ** 2).sum(axis=1)
    s = trace.step_norm2  # s[j] = ||z_j - z_{j-1}||^2, s[0] = 0
    cs = np.concatenate(([0.0], np.cumsum(s)))

    ks = np.arange(n - 1)
    # sum_{j = k - tau - 1}^{k} ||z_{j+1} - z_j||^2  ->  s[m], m in [k - tau, k + 1]
    lo = np.maximum(ks - tau, 0)
    hi = ks + 1
    window1 = cs[hi + 1] - cs[lo]
    # sum_{j = k - 2}^{k - 1}  ->  s[m], m in [k - 1, k]
    lo2 = np.maximum(ks - 1, 0)
    window2 = cs[ks + 1] - cs[lo2]

    # ||z_k - z_{k-1}||^2 is s[k]; s[0] = 0 covers the z_{-1} := z_0 case.
    zstep_prev = s[ks]

    rhs = (
        phi_x
        + (1.0 + eta2) / (2.0 * alpha) * d2[ks]
        - (1.0 - eta1) / (2.0 * alpha) * d2[ks + 1]
        - s[ks + 1] / (4.0 * alpha)
        + (eta2 + 2.0 * eta2 * eta2) / (2.0 * alpha) * zstep_prev
        + L * (tau + 2) / 2.0 * window1
        + eta1 * (1.0 + eta2) ** 2 / alpha * window2
    )
    residuals = rhs - trace.phi[1:]
    tol = slack * (1.0 + abs(phi_x))
    bad = np.nonzero(residuals < -tol)[0]
    first = int(bad[0]) if bad.size else None
    return DescentReport(
        residuals=residuals,
        min_residual=float(residuals.min()),
        tolerance=tol,
        first_violation=first,
    )
