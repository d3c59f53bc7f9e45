"""Sufficient gain conditions for convergence and the derived scheme constants.

All inequalities are strict and evaluated with zero slack. Reports carry the
left- and right-hand side of every clause so margins are visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
import warnings

from .game import RegularityConstants
from .graph import GraphConstants


@dataclass(frozen=True)
class RuleParams:
    k: float
    alpha: float

    def __post_init__(self):
        if not (self.k > 0 and self.alpha > 0):
            raise ValueError("k and alpha must be positive")


class Theorem(str, Enum):
    T1 = "T1"
    COROLLARY1 = "Corollary1"
    T2 = "T2"
    T3 = "T3"


TITLES = {
    Theorem.T1: "continuous communication, undirected graph",
    Theorem.COROLLARY1: "continuous communication, weight-balanced digraph",
    Theorem.T2: "periodic communication",
    Theorem.T3: "dynamic event-triggered communication",
}


@dataclass(frozen=True)
class Clause:
    text: str
    lhs: float
    rhs: float

    @property
    def passed(self) -> bool:
        return self.lhs > self.rhs


@dataclass(frozen=True)
class Derived:
    tau: float | None = None
    xi: float | None = None
    xi_sq: float | None = None
    a: float | None = None
    b_tau: float | None = None
    beta1: float | None = None
    beta2: float | None = None


@dataclass(frozen=True)
class ConditionReport:
    theorem: Theorem
    clauses: tuple
    derived: Derived = field(default_factory=Derived)
    extra_ok: bool = True  # formula-domain requirements outside the clauses

    @property
    def satisfied(self) -> bool:
        return self.extra_ok and all(c.passed for c in self.clauses)

    def records(self) -> list[dict]:
        return [{"theorem": self.theorem.value, "clause": c.text, "lhs": c.lhs, "rhs": c.rhs, "pass": c.passed}
                for c in self.clauses]

    def format(self) -> str:
        lines = [f"[{self.theorem.value}] {TITLES[self.theorem]}: {'SATISFIED' if self.satisfied else 'NOT SATISFIED'}"]
        width = max(len(c.text) for c in self.clauses)
        for c in self.clauses:
            mark = "pass" if c.passed else "FAIL"
            lines.append(f"  {c.text:<{width}}  lhs={c.lhs:12.6f}  rhs={c.rhs:12.6f}  {mark}")
        d = self.derived
        extras = [(name, getattr(d, name)) for name in ("xi_sq", "xi", "a", "b_tau", "tau", "beta1", "beta2")
                  if getattr(d, name) is not None]
        if extras:
            lines.append("  derived: " + ", ".join(f"{k}={v:.6g}" for k, v in extras))
        if self.theorem is Theorem.T2 and d.tau is None:
            lines.append("  derived: xi^2 <= 0, no admissible period")
        return "\n".join(lines)


def _t1_threshold(p, lam2, rl, r):
    return max(2 * r.theta / r.w, r.theta + math.sqrt(r.theta ** 2 + p.alpha * rl), rl / lam2)


def _t2_threshold(p, c, r):
    return max(2 * r.theta / r.w,
               r.theta + math.sqrt(r.theta ** 2 + 2 * p.alpha * c.rl_norm),
               c.rl_norm / c.lambda2 + c.lap_norm / (2 * c.lambda2))


def _continuous(theorem, p, lam2, rl, r):
    return ConditionReport(theorem, (
        Clause("k > max{2θ/w, θ+√(θ²+α‖RL‖), ‖RL‖/λ₂}", p.k, _t1_threshold(p, lam2, rl, r)),
        Clause("α(λ₂-‖RL‖/k) > θ+k²θ/4", p.alpha * (lam2 - rl / p.k), r.theta + p.k ** 2 * r.theta / 4),
    ))


def check_theorem1(p: RuleParams, c: GraphConstants, r: RegularityConstants) -> ConditionReport:
    return _continuous(Theorem.T1, p, c.lambda2, c.rl_norm, r)


def check_corollary1(p: RuleParams, c: GraphConstants, r: RegularityConstants) -> ConditionReport:
    """Same clauses as :func:`check_theorem1` with λ₂ of the symmetrized Laplacian.

    ``GraphConstants.lambda2`` already holds that value for digraphs; an
    undirected input only triggers a warning because both coincide.
    """
    if not c.directed:
        warnings.warn("check_corollary1 called with undirected graph constants", stacklevel=2)
    return _continuous(Theorem.COROLLARY1, p, c.lambda2, c.rl_norm, r)


def periodic_bound(a: float, b: float, xi: float) -> float:
    """Largest admissible communication period ``(1/a)·ln(1 + aξ/(a+b+bξ))``."""
    return math.log1p(a * xi / (a + b + b * xi)) / a


def check_theorem2(p: RuleParams, c: GraphConstants, r: RegularityConstants) -> ConditionReport:
    k, al, lam2, rl, lap = p.k, p.alpha, c.lambda2, c.rl_norm, c.lap_norm
    clauses = (
        Clause("k > max{2θ/w, θ+√(θ²+2α‖RL‖), ‖RL‖/λ₂+‖L‖/2λ₂}", k, _t2_threshold(p, c, r)),
        Clause("α(λ₂-‖RL‖/k-‖L‖/2k) > θ+k²θ/4", al * (lam2 - rl / k - lap / (2 * k)), r.theta + k ** 2 * r.theta / 4),
    )
    xi_sq = ((al * lam2 - r.theta) * k - al * rl - k ** 3 * r.theta / 4 - al * lap / 2) / (al * rl + al * lap * k ** 2 / 2)
    a = (r.theta + 1) / al
    b_tau = al * c.stsl_norm
    if xi_sq > 0:
        xi = math.sqrt(xi_sq)
        derived = Derived(tau=periodic_bound(a, b_tau, xi), xi=xi, xi_sq=xi_sq, a=a, b_tau=b_tau)
        return ConditionReport(Theorem.T2, clauses, derived)
    return ConditionReport(Theorem.T2, clauses, Derived(xi_sq=xi_sq, a=a, b_tau=b_tau), extra_ok=False)


def trigger_gains(p: RuleParams, c: GraphConstants) -> tuple[float, float]:
    """``(β₁, β₂) = (α‖RL‖/k, (α-1)k‖L‖/2)``."""
    return p.alpha * c.rl_norm / p.k, (p.alpha - 1) * p.k * c.lap_norm / 2


def check_theorem3(p: RuleParams, c: GraphConstants, r: RegularityConstants) -> ConditionReport:
    k, al, lam2, rl, lap = p.k, p.alpha, c.lambda2, c.rl_norm, c.lap_norm
    beta1, beta2 = trigger_gains(p, c)
    clauses = (
        Clause("k > max{2θ/w, θ+√(θ²+2α‖RL‖), ‖RL‖/λ₂+‖L‖/2λ₂}", k, _t2_threshold(p, c, r)),
        Clause("(α-1)(λ₂-‖RL‖/k-‖L‖/2k) > θ+k²θ/4-‖RL‖/k",
               (al - 1) * (lam2 - rl / k - lap / (2 * k)), r.theta + k ** 2 * r.theta / 4 - rl / k),
        Clause("α > 1", al, 1.0),
    )
    return ConditionReport(Theorem.T3, clauses, Derived(beta1=beta1, beta2=beta2))


def governing_check(scheme_variant: str, p: RuleParams, c: GraphConstants, r: RegularityConstants) -> ConditionReport:
    """The report whose theorem covers the given communication scheme."""
    if scheme_variant == "continuous":
        return check_corollary1(p, c, r) if c.directed else check_theorem1(p, c, r)
    if scheme_variant == "periodic":
        return check_theorem2(p, c, r)
    return check_theorem3(p, c, r)
