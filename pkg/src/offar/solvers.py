"""Outer iterations: derivative-only regularization solvers and an AR2 baseline.

run_offar drives the first-order-target method for p in {1, 2}: every step is
accepted, and the regularization weight sigma_k is steered only by gradient
norms and step norms through the mu1/nu recursions.  run_moffar adds the
curvature channel (mu2, smallest Hessian eigenvalue) and stops at approximate
second-order points.  Both support a strict mode (sigma_k = max of the lower
bound and the mu estimates, nu0 user supplied) and a practical mode (the
xi/target relaxation, nu0 = max[varsigma, 6||g0||], optional smoothing of the
noisy update quantities).

run_ar2 is the classical function-value-based adaptive regularization
baseline, sharing the same exact subproblem solver; it is the only driver
that reads fvalue.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields
from enum import Enum

import numpy as np

from .model import DerivativeBundle, RegularizedModel, taylor_decrease
from .subsolver import StepResult, certify, solve_p1, solve_p2
from .trace import RunTrace

Array = np.ndarray


class RunStatus(str, Enum):
    FIRST_ORDER = "FirstOrderPoint"
    SECOND_ORDER = "SecondOrderPoint"
    MAX_ITERATIONS = "MaxIterations"
    ORACLE_OVERFLOW = "OracleOverflow"


class CertificateError(RuntimeError):
    """An exact subproblem solution failed its own step conditions."""


def _config_hash(config) -> str:
    items = [(f.name, getattr(config, f.name)) for f in fields(config)]
    text = type(config).__name__ + repr(items)
    return hashlib.md5(text.encode()).hexdigest()[:12]


@dataclass
class OffoConfig:
    """Parameters of the derivative-only drivers.

    theta1 > 1 and theta2 > 1 control the step acceptance certificates,
    vartheta in (0, 1] the lower regularization fence, beta in (0, 1] the
    target decay exponent of the practical mode, varsigma > 0 the tiny
    positive floor.  nu0 = None means the practical rule
    max[varsigma, 6 ||g0||]; strict mode requires an explicit nu0.
    """

    degree: int = 2
    theta1: float = 2.0
    theta2: float | None = None
    vartheta: float = 1e-3
    eps1: float = 1e-6
    eps2: float | None = None
    beta: float = 1.0
    varsigma: float = 1e-6
    max_iter: int = 50000
    smoothing: bool = False
    strict_mode: bool = False
    nu0: float | None = None

    def __post_init__(self):
        if self.degree not in (1, 2):
            raise ValueError(f"degree must be 1 or 2, got {self.degree}")
        if not self.theta1 > 1.0:
            raise ValueError(f"theta1 must exceed 1, got {self.theta1}")
        if self.theta2 is not None and not self.theta2 > 1.0:
            raise ValueError(f"theta2 must exceed 1, got {self.theta2}")
        if not 0.0 < self.vartheta <= 1.0:
            raise ValueError(f"vartheta must lie in (0, 1], got {self.vartheta}")
        if not 0.0 < self.eps1 <= 1.0:
            raise ValueError(f"eps1 must lie in (0, 1], got {self.eps1}")
        if self.eps2 is not None and not 0.0 < self.eps2 <= 1.0:
            raise ValueError(f"eps2 must lie in (0, 1], got {self.eps2}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if not self.varsigma > 0.0:
            raise ValueError(f"varsigma must be positive, got {self.varsigma}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be nonnegative, got {self.max_iter}")
        if self.smoothing and self.degree != 2:
            raise ValueError("smoothing is defined for degree 2 only")
        if self.smoothing and self.strict_mode:
            raise ValueError("smoothing is a practical-mode feature")
        if self.nu0 is not None and not self.nu0 > 0.0:
            raise ValueError(f"nu0 must be positive, got {self.nu0}")


@dataclass
class Ar2Config:
    """Classical AR2 parameters.

    inner_theta is the inner stopping parameter of the reference
    parameterization; it is recorded but unused because the subproblem is
    solved exactly here.
    """

    eps1: float = 1e-6
    sigma0: float = 1.0
    eta1: float = 1e-4
    eta2: float = 0.95
    gamma1: float = 2.0
    gamma2: float = 0.5
    gamma3: float = 1e20
    sigma_min: float = 1e-4
    inner_theta: float = 0.1
    max_iter: int = 50000

    def __post_init__(self):
        if not 0.0 < self.eps1 <= 1.0:
            raise ValueError(f"eps1 must lie in (0, 1], got {self.eps1}")
        if not self.sigma0 >= self.sigma_min:
            raise ValueError("sigma0 must be at least sigma_min")
        if not 0.0 < self.eta1 <= self.eta2 < 1.0:
            raise ValueError("need 0 < eta1 <= eta2 < 1")
        if not (self.gamma1 > 1.0 and 0.0 < self.gamma2 < 1.0 and self.gamma3 >= self.gamma1):
            raise ValueError("need gamma1 > 1, 0 < gamma2 < 1, gamma3 >= gamma1")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be nonnegative, got {self.max_iter}")


@dataclass
class SolverState:
    """Mutable per-run record consumed by the scalar update rules."""

    k: int = 0
    nu: float = 1.0
    sigma: float = 1.0
    mu1: float | None = None
    mu2: float | None = None
    xi: float = 1.0
    target: float = 0.0
    delta: float | None = None
    tau: float | None = None


@dataclass
class RunHistory:
    """Full iterate record, kept only on request (memory)."""

    xs: list
    bundles: list
    steps: list
    step_results: list


@dataclass
class RunOutcome:
    status: RunStatus
    final_x: Array
    final_grad_norm: float
    iterations: int
    trace: RunTrace
    final_min_eig: float | None = None
    history: RunHistory | None = None


def mu1_update(grad_norm: float, prev_step_norm: float, sigma_prev: float,
               theta1: float, p: int) -> float:
    """First-order regularization estimate p! ||g_k|| / ||s_{k-1}||^p - theta1 sigma_{k-1}."""
    if not prev_step_norm > 0.0:
        raise ValueError("previous step norm must be positive")
    return math.factorial(p) * grad_norm / prev_step_norm**p - theta1 * sigma_prev


def mu2_update(min_eig: float, prev_step_norm: float, sigma_prev: float,
               theta2: float, p: int) -> float:
    """Curvature estimate (p-1)! max[0, -lambda_min] / ||s_{k-1}||^(p-1) - theta2 sigma_{k-1}."""
    if not prev_step_norm > 0.0:
        raise ValueError("previous step norm must be positive")
    negcurv = max(0.0, -min_eig)
    return (
        math.factorial(p - 1) * negcurv / prev_step_norm ** (p - 1)
        - theta2 * sigma_prev
    )


def nu_update(nu: float, step_norm: float, p: int) -> float:
    """nu_{k+1} = nu_k + nu_k ||s_k||^(p+1); nondecreasing by construction."""
    return nu + nu * step_norm ** (p + 1)


def sigma_select(state: SolverState, config: OffoConfig) -> float:
    """Pick sigma_k inside [vartheta nu_k, max(nu_k, mu1_k[, mu2_k])].

    Strict mode takes the mu estimates at face value; practical mode scales
    mu1 by the relaxation factor xi.  Both results are clamped into the
    admissible interval (a no-op mathematically, kept as a guard).
    """
    if state.mu1 is None:
        raise ValueError("sigma_select needs mu1 (k >= 1)")
    lo = config.vartheta * state.nu
    cands = [state.nu, state.mu1]
    if state.mu2 is not None:
        cands.append(state.mu2)
    hi = max(cands)
    if config.strict_mode:
        value = max(lo, state.mu1, *([state.mu2] if state.mu2 is not None else []))
    else:
        value = max(lo, state.xi * state.mu1)
    return min(max(value, lo), max(hi, lo))


def xi_target_update(state: SolverState, grad_norm_now: float,
                     grad_norm_prev: float, config: OffoConfig) -> tuple[float, float]:
    """Practical-mode relaxation: halve xi below target, push toward 1 on growth."""
    xi, target = state.xi, state.target
    if grad_norm_now <= target:
        xi = max(config.vartheta, 0.5 * xi)
        target = 0.9 * grad_norm_now**config.beta
    elif grad_norm_now > max(target, grad_norm_prev) and xi < 1.0:
        xi = 0.5 * (1.0 + xi)
    return xi, target


def smoothed_updates(state: SolverState, grad_norm: float, prev_step_norm: float,
                     config: OffoConfig) -> tuple[float, float, float]:
    """Exponentially smoothed delta/tau recursions and the resulting mu1.

    delta smooths the raw ratio 2 ||g_k|| / ||s_{k-1}||^2 (degree 2), tau
    smooths the gradient norm used by the xi/target rules.
    """
    if not prev_step_norm > 0.0:
        raise ValueError("previous step norm must be positive")
    if state.delta is None or state.tau is None:
        raise ValueError("smoothing state not initialized")
    delta = 0.9 * state.delta + 0.1 * (2.0 * grad_norm / prev_step_norm**2)
    tau = 0.9 * state.tau + 0.1 * grad_norm
    mu1 = delta - config.theta1 * state.sigma
    return delta, tau, mu1


def _min_eig(bundle: DerivativeBundle) -> float | None:
    if bundle.hessian is None:
        return None
    return float(np.linalg.eigvalsh(bundle.hessian)[0])


def run_offar(problem, config: OffoConfig, *, collect_history: bool = False) -> RunOutcome:
    """First-order driver; terminates when ||g_k|| <= eps1."""
    return _run_offo(problem, config, second_order=False, collect_history=collect_history)


def run_moffar(problem, config: OffoConfig, *, collect_history: bool = False) -> RunOutcome:
    """Second-order driver; needs degree 2, theta2 and eps2."""
    if config.degree != 2:
        raise ValueError("run_moffar requires degree 2")
    if config.theta2 is None or config.eps2 is None:
        raise ValueError("run_moffar requires theta2 and eps2")
    return _run_offo(problem, config, second_order=True, collect_history=collect_history)


def _run_offo(problem, config: OffoConfig, *, second_order: bool,
              collect_history: bool) -> RunOutcome:
    p = config.degree
    need_hessian = p == 2
    algorithm = ("moffar" if second_order else "offar") + str(p)
    trace = RunTrace(problem=getattr(problem, "name", ""), algorithm=algorithm,
                     config_hash=_config_hash(config))
    history = RunHistory([], [], [], []) if collect_history else None

    if config.strict_mode and config.nu0 is None:
        raise ValueError("strict mode requires an explicit nu0")

    x = np.array(problem.x0, dtype=float)
    bundle = problem.evaluate(x)
    if not bundle.is_finite(need_hessian=need_hessian):
        trace.append(k=0, grad_norm=math.nan)
        return RunOutcome(RunStatus.ORACLE_OVERFLOW, x, math.nan, 0, trace,
                          history=history)
    gnorm = float(np.linalg.norm(bundle.gradient))
    # The first-order driver never needs eigenvalues ahead of the subproblem
    # solve, so lambda_min is tracked per iterate only in the second-order one.
    min_eig = _min_eig(bundle) if second_order else None

    nu0 = config.nu0 if config.nu0 is not None else max(config.varsigma, 6.0 * gnorm)
    state = SolverState(nu=nu0, sigma=nu0)
    state.target = 0.9 * gnorm**config.beta
    if config.smoothing:
        state.delta = max(config.varsigma, gnorm)
        state.tau = gnorm
    gnorm_prev = gnorm
    tau_prev = state.tau
    prev_step_norm = None

    if collect_history:
        history.xs.append(x.copy())
        history.bundles.append(bundle)

    k = 0
    status = None
    while True:
        stop = gnorm <= config.eps1
        if second_order:
            stop = stop and min_eig >= -config.eps2
        if stop:
            status = RunStatus.SECOND_ORDER if second_order else RunStatus.FIRST_ORDER
            break
        if k >= config.max_iter:
            status = RunStatus.MAX_ITERATIONS
            break

        if k == 0:
            sigma = nu0
        else:
            if config.smoothing:
                state.delta, tau_now, state.mu1 = smoothed_updates(
                    state, gnorm, prev_step_norm, config)
            else:
                state.mu1 = mu1_update(gnorm, prev_step_norm, state.sigma,
                                       config.theta1, p)
            if second_order:
                state.mu2 = mu2_update(min_eig, prev_step_norm, state.sigma,
                                       config.theta2, p)
            if not config.strict_mode:
                if config.smoothing:
                    measure_now, measure_prev = tau_now, tau_prev
                else:
                    measure_now, measure_prev = gnorm, gnorm_prev
                state.xi, state.target = xi_target_update(
                    state, measure_now, measure_prev, config)
            if config.smoothing:
                tau_prev = state.tau = tau_now
            sigma = sigma_select(state, config)
        state.sigma = sigma

        model = RegularizedModel(bundle, sigma, p)
        if p == 1:
            step = solve_p1(bundle.gradient, sigma)
        else:
            step = solve_p2(bundle.gradient, bundle.hessian, sigma)
        if not certify(step, model, config.theta1,
                       config.theta2 if second_order else None):
            raise CertificateError(
                f"step conditions failed at iteration {k} (sigma={sigma!r})")

        snorm = float(np.linalg.norm(step.step))
        trace.append(
            k=k, grad_norm=gnorm, sigma=sigma, nu=state.nu,
            mu1=math.nan if state.mu1 is None else state.mu1,
            mu2=math.nan if state.mu2 is None else state.mu2,
            step_norm=snorm, model_reduction=step.model_reduction,
            taylor_grad_norm=step.taylor_grad_norm,
            xi=math.nan if config.strict_mode else state.xi,
            target=math.nan if config.strict_mode else state.target,
            delta=math.nan if state.delta is None else state.delta,
            tau=math.nan if state.tau is None else state.tau,
            min_eig=(step.taylor_min_curv if p == 2 else math.nan),
            fvalue=math.nan if bundle.fvalue is None else bundle.fvalue,
        )
        if collect_history:
            history.steps.append(step.step.copy())
            history.step_results.append(step)

        x = x + step.step
        state.nu = nu_update(state.nu, snorm, p)
        prev_step_norm = snorm
        gnorm_prev = gnorm
        k += 1

        bundle = problem.evaluate(x)
        if not bundle.is_finite(need_hessian=need_hessian):
            status = RunStatus.ORACLE_OVERFLOW
            gnorm = math.nan
            min_eig = math.nan if second_order else None
            break
        gnorm = float(np.linalg.norm(bundle.gradient))
        min_eig = _min_eig(bundle) if second_order else None
        if collect_history:
            history.xs.append(x.copy())
            history.bundles.append(bundle)

    if min_eig is None and p == 2 and status != RunStatus.ORACLE_OVERFLOW:
        min_eig = _min_eig(bundle)
    trace.append(
        k=k, grad_norm=gnorm, nu=state.nu,
        min_eig=math.nan if min_eig is None else min_eig,
        fvalue=math.nan if (bundle.fvalue is None or status == RunStatus.ORACLE_OVERFLOW)
        else bundle.fvalue,
        tau=math.nan if state.tau is None else state.tau,
        delta=math.nan if state.delta is None else state.delta,
    )
    return RunOutcome(status, x, gnorm, k, trace,
                      final_min_eig=None if min_eig is None else float(min_eig),
                      history=history)


def run_ar2(problem, config: Ar2Config, *, collect_history: bool = False) -> RunOutcome:
    """Function-value-based baseline with the standard accept/reject loop.

    Rejected iterations still count (and still cost one objective
    evaluation); the trace records the ratio rho and the accept flag per
    iteration.
    """
    trace = RunTrace(problem=getattr(problem, "name", ""), algorithm="ar2",
                     config_hash=_config_hash(config))
    history = RunHistory([], [], [], []) if collect_history else None

    x = np.array(problem.x0, dtype=float)
    bundle = problem.evaluate(x)
    if bundle.fvalue is None or bundle.hessian is None:
        raise ValueError("ar2 needs function values and Hessians")
    if not bundle.is_finite(need_hessian=True) or not math.isfinite(bundle.fvalue):
        trace.append(k=0, grad_norm=math.nan)
        return RunOutcome(RunStatus.ORACLE_OVERFLOW, x, math.nan, 0, trace,
                          history=history)
    gnorm = float(np.linalg.norm(bundle.gradient))
    sigma = config.sigma0
    if collect_history:
        history.xs.append(x.copy())
        history.bundles.append(bundle)

    k = 0
    status = None
    while True:
        if gnorm <= config.eps1:
            status = RunStatus.FIRST_ORDER
            break
        if k >= config.max_iter:
            status = RunStatus.MAX_ITERATIONS
            break

        step = solve_p2(bundle.gradient, bundle.hessian, sigma)
        model = RegularizedModel(bundle, sigma, 2)
        decrease = taylor_decrease(model, step.step)
        if not (step.model_reduction > 0.0 and decrease > 0.0):
            raise CertificateError(f"degenerate subproblem solution at iteration {k}")

        trial_x = x + step.step
        trial = problem.evaluate(trial_x)
        if (trial.fvalue is None or not math.isfinite(trial.fvalue)
                or not trial.is_finite(need_hessian=True)):
            k += 1
            gnorm = math.nan
            status = RunStatus.ORACLE_OVERFLOW
            break
        rho = (bundle.fvalue - trial.fvalue) / decrease
        accepted = rho >= config.eta1

        trace.append(
            k=k, grad_norm=gnorm, sigma=sigma,
            step_norm=float(np.linalg.norm(step.step)),
            model_reduction=step.model_reduction,
            taylor_grad_norm=step.taylor_grad_norm,
            min_eig=step.taylor_min_curv,
            fvalue=bundle.fvalue, rho=rho, accepted=float(accepted),
        )
        if collect_history:
            history.steps.append(step.step.copy())
            history.step_results.append(step)

        if accepted:
            x = trial_x
            bundle = trial
            gnorm = float(np.linalg.norm(bundle.gradient))
            if rho >= config.eta2:
                sigma = max(config.sigma_min, config.gamma2 * sigma)
        else:
            sigma = min(config.gamma1 * sigma, config.gamma3)
        k += 1
        if collect_history and accepted:
            history.xs.append(x.copy())
            history.bundles.append(bundle)

    trace.append(
        k=k, grad_norm=gnorm, sigma=sigma,
        min_eig=math.nan if bundle.hessian is None else _min_eig(bundle),
        fvalue=math.nan if status == RunStatus.ORACLE_OVERFLOW else bundle.fvalue,
    )
    return RunOutcome(status, x, gnorm, k, trace,
                      final_min_eig=_min_eig(bundle), history=history)
