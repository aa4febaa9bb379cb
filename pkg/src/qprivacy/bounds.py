"""Pseudoinverse Cramer-Rao bounds for linear functions of the phases.

All bounds are per single probe event.  A bound is only attainable when the
weight vector lies in the support of the information matrix; outside it the
pseudoinverse still gives a number, but an :class:`UnattainableBoundWarning`
is issued and the report lists the weight.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInput
from .matops import ANALYTIC_THRESHOLD, pinv, support_projector, sym_matrix
from .privacy import as_weights

_SUPPORT_TOL = 1e-6


class UnattainableBoundWarning(UserWarning):
    pass


def _vector(w, dim: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (dim,):
        raise InvalidInput(f"weight vector must have shape ({dim},), got {w.shape}")
    if not np.all(np.isfinite(w)) or np.linalg.norm(w) <= 1e-12:
        raise InvalidInput("weight vector must be finite and non-zero")
    return w


def _outside_support(proj: np.ndarray, w: np.ndarray) -> float:
    return float(np.linalg.norm(w - proj @ w))


def saturable(f, w, rank_threshold: float = ANALYTIC_THRESHOLD) -> bool:
    """True iff ``w`` lies in the numerical support of ``f``."""
    f = sym_matrix(f)
    w = _vector(w, f.shape[0])
    proj = support_projector(f, rank_threshold)
    return _outside_support(proj, w) <= _SUPPORT_TOL * np.linalg.norm(w)


def crb_scalar(f, w, rank_threshold: float = ANALYTIC_THRESHOLD) -> float:
    """Variance bound ``w^T F^+ w`` for the estimate of ``w . phi``."""
    f = sym_matrix(f)
    w = _vector(w, f.shape[0])
    if not saturable(f, w, rank_threshold):
        warnings.warn(
            "weight vector has a component outside the Fisher support; "
            "the pseudoinverse bound is not attainable",
            UnattainableBoundWarning,
            stacklevel=2,
        )
    return float(w @ pinv(f, rank_threshold) @ w)


def weight_matrix(weights) -> np.ndarray:
    """``W = sum_j w_j w_j^T``."""
    w = as_weights(weights)
    return w.T @ w


def crb_trace(f, weights, rank_threshold: float = ANALYTIC_THRESHOLD) -> float:
    """Total-variance bound ``Tr(W F^+)`` for several linear functions."""
    f = sym_matrix(f)
    w = as_weights(weights, f.shape[0])
    return float(np.trace(weight_matrix(w) @ pinv(f, rank_threshold)))


@dataclass
class BoundReport:
    scalar_bounds: list[float]
    trace_f: float
    saturable: list[bool]
    scalar_bounds_q: Optional[list[float]] = None
    trace_q: Optional[float] = None
    events: int = 1
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scalar_bounds": self.scalar_bounds,
            "scalar_bounds_q": self.scalar_bounds_q,
            "trace_f": self.trace_f,
            "trace_q": self.trace_q,
            "saturable": self.saturable,
            "events": self.events,
            "warnings": self.warnings,
        }


def bound_report(
    f,
    weights,
    q=None,
    events: int = 1,
    rank_threshold: float = ANALYTIC_THRESHOLD,
) -> BoundReport:
    """Collect scalar and trace bounds, divided by the number of events."""
    f = sym_matrix(f)
    w = as_weights(weights, f.shape[0])
    if events < 1:
        raise InvalidInput("events must be a positive integer")
    fp = pinv(f, rank_threshold)
    proj = support_projector(f, rank_threshold)
    notes = []
    sat = []
    for j, wj in enumerate(w):
        ok = _outside_support(proj, wj) <= _SUPPORT_TOL * np.linalg.norm(wj)
        sat.append(bool(ok))
        if not ok:
            notes.append(f"weight {j}: component outside the Fisher support, bound not attainable")
    report = BoundReport(
        scalar_bounds=[float(wj @ fp @ wj) / events for wj in w],
        trace_f=float(np.trace(weight_matrix(w) @ fp)) / events,
        saturable=sat,
        events=int(events),
        warnings=notes,
    )
    if q is not None:
        q = sym_matrix(q)
        if q.shape != f.shape:
            raise InvalidInput("F and Q dimensions differ")
        qp = pinv(q, rank_threshold)
        report.scalar_bounds_q = [float(wj @ qp @ wj) / events for wj in w]
        report.trace_q = float(np.trace(weight_matrix(w) @ qp)) / events
    return report
