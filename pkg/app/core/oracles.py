"""Brute-force reference solvers for small instances.

These solve the same subproblems as the production operators by generic,
slower means (grids, projected gradient, subgradient descent, restarts) and
return a certified objective value so the fast paths can be checked against
them.
"""
import logging
import time
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
import scipy.optimize

from app.core.basis import basis_objective, max_row_norm_subgradient
from app.core.exceptions import TimeBudgetExceededError
from app.core.prox import apply_prox, noise_penalty
from app.schemas.regularizer import RegularizerSpec

logger = logging.getLogger(__name__)

OracleProblem = Literal["prox_scalar", "prox_vector", "constrained_r", "coeff_noise", "basis"]

MAX_P = 10
MAX_D = 4


@dataclass(frozen=True)
class OracleSolution:
    solution: Any
    objective: float


class _Budget:
    def __init__(self, seconds: float):
        self.deadline = time.perf_counter() + seconds
        self.seconds = seconds

    def check(self) -> None:
        if time.perf_counter() > self.deadline:
            raise TimeBudgetExceededError(f"oracle exceeded its {self.seconds:g} s budget")


def prox_scalar(v: float, tau: float, step: float = 1e-3) -> OracleSolution:
    """min_e 1/2 (v - e)^2 + tau |e| by a grid of ``step`` then a bounded refinement."""
    span = abs(v) + 1.0
    grid = np.arange(-span, span + step, step)
    values = 0.5 * (v - grid) ** 2 + tau * np.abs(grid)
    best = float(grid[int(np.argmin(values))])

    def objective(e: float) -> float:
        return 0.5 * (v - e) ** 2 + tau * abs(e)

    refined = scipy.optimize.minimize_scalar(
        objective, bounds=(best - step, best + step), method="bounded", options={"xatol": 1e-12}
    )
    candidates = [best, float(refined.x), 0.0]
    e = min(candidates, key=objective)
    return OracleSolution(solution=e, objective=objective(e))


def _dual_ball_projection(u: np.ndarray, spec: RegularizerSpec) -> np.ndarray:
    if spec.kind == "l2":
        norm = float(np.linalg.norm(u))
        return u if norm <= spec.lambda2 else u * (spec.lambda2 / norm)
    bound = spec.lambda2 if spec.kind == "l1" else spec.weights()
    return np.clip(u, -bound, bound)


def prox_vector(v: np.ndarray, spec: RegularizerSpec, iterations: int = 200) -> OracleSolution:
    """Projected gradient on the dual: min_{u in dual ball} 1/2 ||v - u||^2, then e = v - u."""
    v = np.asarray(v, dtype=np.float64)
    u = np.zeros_like(v)
    for _ in range(iterations):
        u = _dual_ball_projection(u - 0.5 * (u - v), spec)
    e = v - u
    return OracleSolution(solution=e, objective=0.5 * float((v - e) @ (v - e)) + noise_penalty(e, spec))


def _ball_projection(r: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(r))
    return r if norm <= 1.0 else r / norm


def constrained_r_reference(
    L: np.ndarray, y: np.ndarray, iterations: int = 100_000, budget: _Budget | None = None
) -> OracleSolution:
    """min_{||r|| <= 1} 1/2 ||y - L r||^2 by an eta grid then projected gradient.

    The grid holds 10^4 log-spaced multipliers; the best feasible r(eta)
    warm-starts projected gradient with step 1/||L||_2^2.
    """
    L = np.asarray(L, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = L.shape[1]
    gram = L.T @ L
    rhs = L.T @ y

    def objective(r: np.ndarray) -> float:
        residual = y - L @ r
        return 0.5 * float(residual @ residual)

    w, V = np.linalg.eigh(gram)
    w = np.maximum(w, 0.0)
    coords = V.T @ rhs
    etas = np.logspace(-8, 8, 10_000)
    scaled = coords[None, :] / (w[None, :] + etas[:, None])
    norms = np.linalg.norm(scaled, axis=1)
    values = 0.5 * float(y @ y) - scaled @ coords + 0.5 * (scaled * scaled) @ w
    values[norms > 1.0] = np.inf

    best = np.zeros(d)
    best_eta = 0.0
    if np.isfinite(values).any():
        k = int(np.argmin(values))
        best, best_eta = V @ scaled[k], float(etas[k])

    lipschitz = float(np.linalg.norm(L, 2) ** 2)
    r = best.copy()
    if lipschitz > 0:
        for k in range(iterations):
            if budget is not None and k % 1000 == 0:
                budget.check()
            nxt = _ball_projection(r - (gram @ r - rhs) / lipschitz)
            if np.abs(nxt - r).max() < 1e-15:
                r = nxt
                break
            r = nxt
    if objective(best) < objective(r):
        r = best
    return OracleSolution(solution=(r, best_eta), objective=objective(r))


def _exact_r_step(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Exact ball-constrained least squares through a root of the secular equation."""
    w, V = np.linalg.eigh(gram)
    w = np.maximum(w, 0.0)
    coords = V.T @ rhs
    if np.all(w > 1e-12) and np.linalg.norm(coords / w) <= 1.0:
        return V @ (coords / w)

    def excess(eta: float) -> float:
        return float(np.linalg.norm(coords / (w + eta))) - 1.0

    upper = 1.0
    while excess(upper) > 0:
        upper *= 2.0
    eta = scipy.optimize.brentq(excess, 1e-15, upper, xtol=1e-15, rtol=1e-15) if excess(1e-15) > 0 else 0.0
    return V @ (coords / (w + max(eta, 1e-15)))


def coeff_noise_reference(
    L: np.ndarray,
    z: np.ndarray,
    spec: RegularizerSpec,
    restarts: int = 20,
    iterations: int = 10_000,
    seed: int = 0,
    budget: _Budget | None = None,
) -> OracleSolution:
    """Joint alternating minimization from random restarts; keeps the best (r, e)."""
    L = np.asarray(L, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    gram = L.T @ L
    rng = np.random.default_rng(seed)

    def objective(r: np.ndarray, e: np.ndarray) -> float:
        residual = z - L @ r - e
        return 0.5 * float(residual @ residual) + noise_penalty(e, spec)

    best: tuple[np.ndarray, np.ndarray] | None = None
    best_value = np.inf
    for restart in range(restarts):
        e = np.zeros_like(z) if restart == 0 else rng.normal(scale=float(np.abs(z).max(initial=1.0)), size=z.shape)
        r = np.zeros(L.shape[1])
        previous = np.inf
        for k in range(iterations):
            if budget is not None and k % 500 == 0:
                budget.check()
            r = _exact_r_step(gram, L.T @ (z - e))
            e = apply_prox(z - L @ r, spec)
            value = objective(r, e)
            if previous - value < 1e-15:
                break
            previous = value
        value = objective(r, e)
        if value < best_value:
            best, best_value = (r, e), value
    return OracleSolution(solution=best, objective=best_value)


def basis_reference(
    A: np.ndarray,
    B: np.ndarray,
    lambda1: float,
    L0: np.ndarray | None = None,
    iterations: int = 1_000_000,
    budget: _Budget | None = None,
) -> OracleSolution:
    """min_L 1/2 tr(L^T L A) - tr(L^T B) + lambda1/2 ||L||_{2,inf}^2.

    Solved twice: as a smooth epigraph program (SLSQP over L and the level
    M >= every squared row norm) and by subgradient descent with diminishing
    steps; the better certified value wins.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    p, d = B.shape
    start = np.zeros((p, d)) if L0 is None else np.asarray(L0, dtype=np.float64).copy()

    def epigraph_objective(x: np.ndarray) -> float:
        L = x[:-1].reshape(p, d)
        return 0.5 * float(np.sum((L.T @ L) * A)) - float(np.sum(L * B)) + 0.5 * lambda1 * x[-1]

    def epigraph_gradient(x: np.ndarray) -> np.ndarray:
        L = x[:-1].reshape(p, d)
        return np.concatenate([(L @ A - B).ravel(), [0.5 * lambda1]])

    def row_slack(x: np.ndarray) -> np.ndarray:
        L = x[:-1].reshape(p, d)
        return x[-1] - np.einsum("ij,ij->i", L, L)

    x0 = np.concatenate([start.ravel(), [float(np.einsum("ij,ij->i", start, start).max(initial=0.0)) + 1.0]])
    result = scipy.optimize.minimize(
        epigraph_objective,
        x0,
        jac=epigraph_gradient,
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": row_slack}],
        options={"maxiter": 2000, "ftol": 1e-15},
    )
    best = result.x[:-1].reshape(p, d)
    best_value = basis_objective(best, A, B, lambda1)
    start_value = basis_objective(start, A, B, lambda1)
    if start_value < best_value:
        best, best_value = start.copy(), start_value

    L = start.copy()
    scale = 1.0 / max(float(np.linalg.norm(A, 2)) + lambda1, 1e-12)
    for k in range(1, iterations + 1):
        if budget is not None and k % 10_000 == 0:
            budget.check()
        subgradient = L @ A - B + lambda1 * max_row_norm_subgradient(L)
        L = L - (scale / np.sqrt(k)) * subgradient
        if k % 100 == 0:
            value = basis_objective(L, A, B, lambda1)
            if value < best_value:
                best, best_value = L.copy(), value
    return OracleSolution(solution=best, objective=best_value)


def oracle_small_instance(problem: OracleProblem, inputs: dict[str, Any], time_budget: float = 60.0) -> OracleSolution:
    """Dispatch to the reference solver for ``problem``.

    Raises:
        ValueError: If the instance is larger than p = 10, d = 4.
        TimeBudgetExceededError: If the solver runs past ``time_budget`` seconds.
    """
    for key in ("L", "B"):
        if key in inputs:
            rows, cols = np.shape(inputs[key])
            if rows > MAX_P or cols > MAX_D:
                raise ValueError(f"oracle instances are limited to p <= {MAX_P}, d <= {MAX_D}")
    if "v" in inputs and np.size(inputs["v"]) > MAX_P:
        raise ValueError(f"oracle instances are limited to p <= {MAX_P}")

    budget = _Budget(time_budget)
    if problem == "prox_scalar":
        return prox_scalar(float(inputs["v"]), float(inputs["tau"]))
    if problem == "prox_vector":
        return prox_vector(np.asarray(inputs["v"]), inputs["spec"])
    if problem == "constrained_r":
        y = np.asarray(inputs["z"]) - np.asarray(inputs.get("e", 0.0))
        return constrained_r_reference(inputs["L"], y, iterations=inputs.get("iterations", 100_000), budget=budget)
    if problem == "coeff_noise":
        return coeff_noise_reference(
            inputs["L"], inputs["z"], inputs["spec"],
            restarts=inputs.get("restarts", 20),
            iterations=inputs.get("iterations", 10_000),
            seed=inputs.get("seed", 0),
            budget=budget,
        )
    if problem == "basis":
        return basis_reference(
            inputs["A"], inputs["B"], float(inputs["lambda1"]),
            L0=inputs.get("L0"),
            iterations=inputs.get("iterations", 1_000_000),
            budget=budget,
        )
    raise ValueError(f"unknown oracle problem {problem!r}")
