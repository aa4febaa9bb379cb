"""Operational privacy quantifier built on the Fisher support projector.

For weight vectors ``w^(1..r)`` the quantifier is

    P_F(W) = 1 - min { v^T Pi_F v : |v| = 1, v orthogonal to every w^(j) }

where ``Pi_F`` projects onto the numerical support of ``F``.  The minimum is
the smallest eigenvalue of ``B^T Pi_F B`` for an orthonormal basis ``B`` of
the orthogonal complement of the weights, so no iterative optimizer is used.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInput, RankInstability
from .matops import (
    ANALYTIC_THRESHOLD,
    NOISY_THRESHOLD,
    _fix_signs,
    complement_basis,
    eigensym,
    is_orthogonal,
    support_projector,
    sym_matrix,
)

NO_COMPLEMENT = "no orthogonal directions exist"
_HIDDEN_TOL = 1e-6
_EXPOSED_TOL = 1e-9


def as_weights(weights, dim: int | None = None) -> np.ndarray:
    """Validate weights as an ``(r, m)`` array of non-zero row vectors."""
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
        raise InvalidInput("weights must be one or more m-vectors")
    if not np.all(np.isfinite(w)):
        raise InvalidInput("weights contain non-finite entries")
    if dim is not None and w.shape[1] != dim:
        raise InvalidInput(f"weights have dimension {w.shape[1]}, matrix has {dim}")
    if np.any(np.linalg.norm(w, axis=1) <= 1e-12):
        raise InvalidInput("every weight vector must be non-zero")
    return w


@dataclass
class PrivacyReport:
    value: float
    minimizer: Optional[np.ndarray]
    support_rank: int
    rank_threshold: float
    per_parameter_hidden: list[bool]
    reason: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "minimizer": None if self.minimizer is None else [float(x) for x in self.minimizer],
            "support_rank": int(self.support_rank),
            "rank_threshold": float(self.rank_threshold),
            "per_parameter_hidden": [bool(h) for h in self.per_parameter_hidden],
            "reason": self.reason,
        }


def _hidden_residuals(proj: np.ndarray) -> np.ndarray:
    # column mu of (I - Pi) is (I - Pi) e_mu
    return np.linalg.norm(np.eye(proj.shape[0]) - proj, axis=0)


def _value_from_projector(proj: np.ndarray, w: np.ndarray):
    basis = complement_basis(w)
    if basis.shape[1] == 0:
        return 0.0, None
    reduced = basis.T @ proj @ basis
    vals, vecs = np.linalg.eigh(0.5 * (reduced + reduced.T))
    minimizer = basis @ vecs[:, 0]
    minimizer = _fix_signs(minimizer[:, None])[:, 0]
    minimizer /= np.linalg.norm(minimizer)
    value = float(np.clip(1.0 - vals[0], 0.0, 1.0))
    return value, minimizer


def privacy_quantifier(f, weights, rank_threshold: float = ANALYTIC_THRESHOLD) -> PrivacyReport:
    """Privacy quantifier of ``f`` for one or several weight vectors.

    Returns a :class:`PrivacyReport`.  When the weights span the whole
    parameter space there is nothing left to hide: the value is 0 and
    ``reason`` says so.

    >>> F = [[.5, .25, 0, .25], [.25, .5, .25, 0], [0, .25, .5, .25], [.25, 0, .25, .5]]
    >>> round(privacy_quantifier(F, [0.25] * 4).value, 12)
    1.0
    """
    f = sym_matrix(f)
    w = as_weights(weights, f.shape[0])
    es = eigensym(f, rank_threshold)
    proj = support_projector(f, rank_threshold)
    value, minimizer = _value_from_projector(proj, w)
    if es.rank == f.shape[0]:
        value = 0.0  # the support is everything: nothing is hidden
    hidden = (_hidden_residuals(proj) > _HIDDEN_TOL).tolist()
    return PrivacyReport(
        value=value,
        minimizer=minimizer,
        support_rank=es.rank,
        rank_threshold=rank_threshold,
        per_parameter_hidden=hidden,
        reason=NO_COMPLEMENT if minimizer is None else None,
    )


@dataclass
class ContinuityResult:
    eps: np.ndarray
    delta: np.ndarray
    slope: Optional[float]
    exact_invariance: bool
    rank: int


def continuity_probe(
    f,
    weights,
    perturbation,
    eps_list: Sequence[float],
    rank_threshold: float = NOISY_THRESHOLD,
) -> ContinuityResult:
    """Measure ``|P_{F + eps E}(w) - P_F(w)|`` over a sweep of ``eps``.

    ``perturbation`` must be normalized to ``max|E| = 1``.  The numerical
    rank must stay constant over the sweep; otherwise the support projector
    jumps and :class:`RankInstability` is raised.  ``slope`` is the
    least-squares slope of ``log|dP|`` against ``log eps`` over points with
    ``|dP| > 1e-14``; when no such points exist the result is flagged as
    exact invariance.
    """
    f = sym_matrix(f)
    e = sym_matrix(perturbation)
    if e.shape != f.shape:
        raise InvalidInput("perturbation and matrix dimensions differ")
    if abs(np.max(np.abs(e)) - 1.0) > 1e-9:
        raise InvalidInput("perturbation must be normalized to max|E| = 1")
    eps = np.asarray(eps_list, dtype=float)
    if eps.ndim != 1 or eps.size == 0 or np.any(eps < 0) or np.any(eps > 0.1):
        raise InvalidInput("eps values must lie in [0, 0.1]")
    w = as_weights(weights, f.shape[0])

    rank0 = eigensym(f, rank_threshold).rank
    p0 = privacy_quantifier(f, w, rank_threshold).value
    delta = np.empty_like(eps)
    for i, ep in enumerate(eps):
        fe = f + ep * e
        rank = eigensym(fe, rank_threshold).rank
        if rank != rank0:
            raise RankInstability(
                f"numerical rank changed from {rank0} to {rank} at eps={ep:g}; "
                "raise or lower rank_threshold"
            )
        delta[i] = abs(privacy_quantifier(fe, w, rank_threshold).value - p0)

    usable = (eps > 0) & (delta > 1e-14)
    slope = None
    if np.count_nonzero(usable) >= 2:
        slope = float(np.polyfit(np.log(eps[usable]), np.log(delta[usable]), 1)[0])
    return ContinuityResult(eps, delta, slope, not np.any(usable), rank0)


def random_perturbation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random symmetric matrix normalized to ``max|E| = 1``."""
    a = rng.uniform(-1.0, 1.0, size=(dim, dim))
    a = 0.5 * (a + a.T)
    return a / np.max(np.abs(a))


def continuity_sweep(
    f,
    weights,
    eps_list: Sequence[float],
    trials: int = 20,
    seed: int = 0,
    rank_threshold: float = NOISY_THRESHOLD,
) -> list[ContinuityResult]:
    """Run :func:`continuity_probe` for ``trials`` random perturbations.

    Trial ``k`` draws from its own stream seeded by ``(seed, k)``.
    """
    f = sym_matrix(f)
    out = []
    for k in range(trials):
        rng = np.random.default_rng([seed, k])
        e = random_perturbation(f.shape[0], rng)
        out.append(continuity_probe(f, weights, e, eps_list, rank_threshold))
    return out


def invariance_check(f, weights, o, rank_threshold: float = ANALYTIC_THRESHOLD) -> float:
    """``|P_{O F O^T}(O w) - P_F(w)|`` for an orthogonal change of basis ``O``."""
    f = sym_matrix(f)
    o = np.asarray(o, dtype=float)
    if o.shape != f.shape or not is_orthogonal(o):
        raise InvalidInput("O must be an orthogonal matrix of matching dimension")
    w = as_weights(weights, f.shape[0])
    before = privacy_quantifier(f, w, rank_threshold).value
    after = privacy_quantifier(o @ f @ o.T, w @ o.T, rank_threshold).value
    return abs(after - before)


@dataclass(frozen=True)
class ParameterExposure:
    index: int
    residual: float  # |(I - Pi) e_mu|
    hidden: bool
    fully_exposed: bool


def identifiability_audit(f, rank_threshold: float = ANALYTIC_THRESHOLD) -> list[ParameterExposure]:
    """Classify each parameter direction against the Fisher support.

    A parameter is hidden when its unit direction sticks out of the support
    and fully exposed when it lies inside it.
    """
    proj = support_projector(f, rank_threshold)
    res = _hidden_residuals(proj)
    return [
        ParameterExposure(i, float(r), bool(r > _HIDDEN_TOL), bool(r <= _EXPOSED_TOL))
        for i, r in enumerate(res)
    ]
