"""Fit fusion weights by least squares constrained to the probability simplex.

Given an m x 3 matrix of agent scores (columns ordered ml, search, kg) and
a length-m vector of ground-truth interaction values, find

    argmin ||scores @ w - truth||^2   subject to   sum(w) = 1, w >= 0.

This is a convex quadratic program over a triangle, which permits an exact
strategy: the optimum lies on one of the seven faces of the 2-simplex
(three vertices, three edges, the interior), and restricted to the face of
its support it solves the sum-to-one equality-constrained least-squares
problem. We therefore solve the small KKT system for every face, keep the
feasible candidates, and take the best. A projected-gradient polish runs
afterwards as a safety net for rank-deficient corner cases; on generic
problems it terminates immediately because the face search is already
optimal.

Ties (flat directions from duplicated columns) resolve to an arbitrary
optimal point; only the objective value is unique.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import IngestError, InvalidProblem
from .fusion import WeightVector

__all__ = ["FitProblem", "FitResult", "fit_weights", "load_fit_table", "project_to_simplex"]

DEFAULT_TOLERANCE = 1e-8
DEFAULT_MAX_ITERATIONS = 10_000

# All 7 non-empty supports over (ml, search, kg); vertices first so a tiny
# iteration budget still yields a feasible answer.
_SUPPORTS = (
    (0,), (1,), (2,),
    (0, 1), (0, 2), (1, 2),
    (0, 1, 2),
)

# Candidate components below this are treated as numerically zero.
_FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class FitProblem:
    """Agent scores (m x 3, columns ml/search/kg) with ground-truth values."""

    agent_scores: np.ndarray
    ground_truth: np.ndarray

    def __post_init__(self):
        try:
            scores = np.asarray(self.agent_scores, dtype=float)
            truth = np.asarray(self.ground_truth, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidProblem(f"problem data is not numeric: {exc}") from None
        if scores.ndim != 2 or scores.shape[1] != 3:
            raise InvalidProblem(f"agent_scores must be m x 3, got shape {scores.shape}")
        if truth.shape != (scores.shape[0],):
            raise InvalidProblem(
                f"ground_truth must have one value per row, got shape {truth.shape}"
            )
        if scores.shape[0] < 1:
            raise InvalidProblem("need at least one scored example")
        if not (np.isfinite(scores).all() and np.isfinite(truth).all()):
            raise InvalidProblem("agent scores and ground truth must be finite")
        scores.setflags(write=False)
        truth.setflags(write=False)
        object.__setattr__(self, "agent_scores", scores)
        object.__setattr__(self, "ground_truth", truth)

    @property
    def size(self) -> int:
        return self.agent_scores.shape[0]


@dataclass(frozen=True)
class FitResult:
    weights: WeightVector
    objective: float
    iterations: int
    converged: bool


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a length-n vector onto the probability simplex."""
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    indices = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - cumulative / indices > 0)[0][-1]
    theta = cumulative[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _objective(scores: np.ndarray, truth: np.ndarray, w: np.ndarray) -> float:
    residual = scores @ w - truth
    return float(residual @ residual)


def _solve_face(scores: np.ndarray, truth: np.ndarray, support: Sequence[int]) -> np.ndarray | None:
    """Minimize ||A_S y - b||^2 with sum(y) = 1 on one support; None if infeasible."""
    k = len(support)
    sub = scores[:, support]
    if k == 1:
        y = np.array([1.0])
    else:
        # KKT system: [2 A^T A, 1; 1^T, 0] [y; lam] = [2 A^T b; 1]
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = 2.0 * sub.T @ sub
        kkt[:k, k] = 1.0
        kkt[k, :k] = 1.0
        rhs = np.concatenate([2.0 * sub.T @ truth, [1.0]])
        solution = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        y = solution[:k]
    if y.min() < -_FEASIBILITY_SLACK:
        return None
    full = np.zeros(3)
    full[list(support)] = np.maximum(y, 0.0)
    total = full.sum()
    if total <= 0.0 or not np.isfinite(total):
        return None
    return full / total


def fit_weights(
    problem: FitProblem,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> FitResult:
    """Solve the simplex-constrained least-squares problem for the fusion weights.

    ``tolerance`` bounds the accepted per-step objective decrease of the
    polish phase; ``max_iterations`` caps the total work (face solves plus
    polish steps). The returned weights satisfy the simplex constraints
    even when the budget runs out (converged=False).
    """
    if not (isinstance(tolerance, (int, float)) and tolerance > 0):
        raise InvalidProblem(f"tolerance must be positive, got {tolerance!r}")
    if not (isinstance(max_iterations, int) and max_iterations >= 1):
        raise InvalidProblem(f"max_iterations must be a positive integer, got {max_iterations!r}")

    scores = problem.agent_scores
    truth = problem.ground_truth

    iterations = 0
    best_w: np.ndarray | None = None
    best_objective = math.inf
    budget_exhausted = False

    for support in _SUPPORTS:
        if iterations >= max_iterations:
            budget_exhausted = True
            break
        iterations += 1
        candidate = _solve_face(scores, truth, support)
        if candidate is None:
            continue
        objective = _objective(scores, truth, candidate)
        if objective < best_objective:
            best_objective = objective
            best_w = candidate

    # Vertices are always feasible, so at least one candidate exists unless
    # the budget stopped us before the first vertex (max_iterations >= 1
    # guarantees it did not).
    assert best_w is not None
    w = best_w

    converged = False
    if not budget_exhausted:
        # Projected-gradient polish: step 1/L with L = 2*||A^T A||_2.
        gram = scores.T @ scores
        lipschitz = 2.0 * float(np.linalg.norm(gram, 2))
        if lipschitz == 0.0:
            # All-zero score matrix: every simplex point has equal objective.
            converged = True
        else:
            step = 1.0 / lipschitz
            current = best_objective
            while iterations < max_iterations:
                iterations += 1
                gradient = 2.0 * (gram @ w - scores.T @ truth)
                w = project_to_simplex(w - step * gradient)
                objective = _objective(scores, truth, w)
                decrease = current - objective
                if objective < current:
                    current = objective
                if decrease <= tolerance:
                    converged = True
                    break
            best_objective = min(best_objective, current)
            if not converged:
                budget_exhausted = True

    # Numerical cleanup so the WeightVector invariants hold exactly enough.
    w = np.maximum(w, 0.0)
    w = w / w.sum()
    weights = WeightVector(float(w[0]), float(w[1]), float(w[2]))
    final_objective = _objective(scores, truth, w)
    return FitResult(
        weights=weights,
        objective=min(best_objective, final_objective),
        iterations=iterations,
        converged=converged,
    )


FIT_TABLE_COLUMNS = ("ml_score", "search_score", "kg_score", "ground_truth")


def load_fit_table(path: str | Path) -> FitProblem:
    """Read a fit problem from TSV with header ml_score/search_score/kg_score/ground_truth."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read fit table {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise IngestError(f"fit table {path} is not UTF-8: {exc}") from exc

    lines = [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise InvalidProblem(f"{path}: empty fit table")
    header = [name.strip() for name in lines[0].split("\t")]
    missing = [name for name in FIT_TABLE_COLUMNS if name not in header]
    if missing:
        raise InvalidProblem(f"{path}: header is missing columns {missing}")
    column = {name: header.index(name) for name in FIT_TABLE_COLUMNS}

    rows: list[list[float]] = []
    truths: list[float] = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) < len(header):
            raise InvalidProblem(f"{path}:{lineno}: expected {len(header)} fields")
        try:
            rows.append(
                [
                    float(fields[column["ml_score"]]),
                    float(fields[column["search_score"]]),
                    float(fields[column["kg_score"]]),
                ]
            )
            truths.append(float(fields[column["ground_truth"]]))
        except ValueError as exc:
            raise InvalidProblem(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise InvalidProblem(f"{path}: no data rows")
    return FitProblem(np.array(rows), np.array(truths))
