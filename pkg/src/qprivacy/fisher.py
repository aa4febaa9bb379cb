"""Classical and quantum Fisher information matrices."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInput, InvalidModel, SingularOutcome
from .matops import sym_matrix

DEFAULT_FD_STEP = 1e-5
DEFAULT_PROB_FLOOR = 1e-12
_GRAD_FLOOR = 1e-6


@dataclass(frozen=True)
class ProbabilityModel:
    """Outcome distribution ``p(x | phases)`` over a finite outcome set.

    ``probs(phases)`` returns all ``outcome_count`` probabilities at once.
    ``jacobian(phases)``, if given, returns the ``(outcome_count, param_dim)``
    matrix of analytic derivatives; otherwise :func:`cfim` falls back to
    central finite differences.
    """

    outcome_count: int
    param_dim: int
    probs: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def evaluate(self, phases) -> np.ndarray:
        phases = np.asarray(phases, dtype=float)
        if phases.shape != (self.param_dim,):
            raise InvalidInput(f"expected {self.param_dim} phases, got shape {phases.shape}")
        p = np.asarray(self.probs(phases), dtype=float).reshape(-1)
        if p.shape != (self.outcome_count,):
            raise InvalidModel(f"model returned {p.size} probabilities, expected {self.outcome_count}")
        if not np.all(np.isfinite(p)):
            raise InvalidModel("model returned non-finite probabilities")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise InvalidModel("probabilities outside [0, 1]")
        if abs(p.sum() - 1.0) > 1e-9:
            raise InvalidModel(f"probabilities sum to {p.sum():.12g}, not 1")
        return np.clip(p, 0.0, 1.0)


def _fd_jacobian(model: ProbabilityModel, phases: np.ndarray, step: float) -> np.ndarray:
    jac = np.empty((model.outcome_count, model.param_dim))
    for mu in range(model.param_dim):
        dp = np.zeros(model.param_dim)
        dp[mu] = step
        hi = np.asarray(model.probs(phases + dp), dtype=float).reshape(-1)
        lo = np.asarray(model.probs(phases - dp), dtype=float).reshape(-1)
        jac[:, mu] = (hi - lo) / (2.0 * step)
    return jac


def cfim(
    model: ProbabilityModel,
    phases,
    *,
    fd_step: float = DEFAULT_FD_STEP,
    prob_floor: float = DEFAULT_PROB_FLOOR,
    use_analytic: bool = True,
) -> np.ndarray:
    """Classical Fisher information ``sum_x (dp/dphi_mu)(dp/dphi_nu) / p``.

    Outcomes with ``p < prob_floor`` contribute zero when their gradient is
    also negligible (``|dp| <= 1e-6``) and raise :class:`SingularOutcome`
    otherwise.
    """
    phases = np.asarray(phases, dtype=float)
    p = model.evaluate(phases)
    if model.jacobian is not None and use_analytic:
        jac = np.asarray(model.jacobian(phases), dtype=float)
    else:
        if fd_step <= 0:
            raise InvalidInput("fd_step must be positive")
        jac = _fd_jacobian(model, phases, fd_step)
    if not np.all(np.isfinite(jac)):
        raise InvalidModel("non-finite probability derivatives")

    small = p < prob_floor
    if np.any(np.abs(jac[small]) > _GRAD_FLOOR):
        bad = np.flatnonzero(small & np.any(np.abs(jac) > _GRAD_FLOOR, axis=1))
        raise SingularOutcome(f"outcomes {bad.tolist()} have p ~ 0 with non-zero slope")
    keep = ~small
    jk = jac[keep]
    f = jk.T @ (jk / p[keep, None])
    return sym_matrix(f)


@dataclass(frozen=True)
class PureStateModel:
    """Pure state ``sum_t a_t |t>`` with commuting diagonal phase generators.

    Encoding ``exp(i sum_mu phi_mu G_mu)`` multiplies basis term ``t`` by
    ``exp(i phi . g_t)`` where ``g_t = generators[t]``.
    """

    amplitudes: np.ndarray
    generators: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        g = np.atleast_2d(np.asarray(self.generators, dtype=float))
        if g.shape[0] != a.shape[0]:
            raise InvalidModel("one generator vector is required per amplitude")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(g))):
            raise InvalidModel("non-finite amplitudes or generator values")
        norm = float(np.sum(np.abs(a) ** 2))
        if abs(norm - 1.0) > 1e-9:
            raise InvalidModel(f"state is not normalized (norm^2 = {norm:.12g})")
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "generators", g)

    @property
    def param_dim(self) -> int:
        return self.generators.shape[1]


def qfim_pure(state: PureStateModel) -> np.ndarray:
    """QFIM of a pure state under commuting diagonal generators.

    For this family the SLD construction reduces to four times the generator
    covariance in the weights ``|a_t|^2``.
    """
    w = np.abs(state.amplitudes) ** 2
    g = state.generators
    mean = w @ g
    second = g.T @ (w[:, None] * g)
    return sym_matrix(4.0 * (second - np.outer(mean, mean)))


@dataclass(frozen=True)
class OrderReport:
    min_eig: float
    ok: bool


def verify_cfim_qfim_order(f, q, tol: float = 1e-9) -> OrderReport:
    """Check ``F <= Q`` in the Loewner order via the spectrum of ``Q - F``."""
    f = sym_matrix(f)
    q = sym_matrix(q)
    if f.shape != q.shape:
        raise InvalidInput(f"dimension mismatch: {f.shape} vs {q.shape}")
    min_eig = float(np.linalg.eigvalsh(q - f)[0])
    return OrderReport(min_eig, min_eig >= -tol)
