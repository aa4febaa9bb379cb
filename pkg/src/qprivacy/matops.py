"""Small dense symmetric linear algebra.

Everything here works on plain ``numpy`` arrays.  Symmetric matrices are
validated and symmetrized by :func:`sym_matrix`; the numerical rank of a
matrix is always decided relative to its largest eigenvalue, so a matrix and
any positive multiple of it share the same support.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, InvalidMatrix

#: relative rank threshold for exact / analytic matrices
ANALYTIC_THRESHOLD = 1e-8
#: relative rank threshold for reconstructed or noisy matrices
NOISY_THRESHOLD = 0.05

_SPAN_THRESHOLD = 1e-10


def sym_matrix(a, *, asym_tol: float | None = None) -> np.ndarray:
    """Return ``a`` as a finite, square, exactly symmetric float array.

    If ``asym_tol`` is given, reject inputs whose asymmetry
    ``max|A - A^T|`` exceeds ``asym_tol * max(1, max|A|)``.
    """
    arr = np.array(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InvalidMatrix(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix("matrix has non-finite entries")
    if asym_tol is not None:
        scale = max(1.0, float(np.max(np.abs(arr))))
        if np.max(np.abs(arr - arr.T)) > asym_tol * scale:
            raise InvalidMatrix("matrix is not symmetric")
    return 0.5 * (arr + arr.T)


def _check_threshold(rank_threshold: float) -> None:
    if not 0.0 <= rank_threshold < 1.0:
        raise InvalidInput(f"rank_threshold must lie in [0, 1), got {rank_threshold}")


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude component positive; magnitudes within 1e-12 relative
    # count as ties and the lowest index wins
    mag = np.abs(vectors)
    top = mag.max(axis=0)
    idx = np.argmax(mag >= top * (1.0 - 1e-12), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues in descending order with paired orthonormal eigenvectors.

    ``rank`` counts eigenvalues strictly above
    ``rank_threshold * max(eigenvalues[0], 0)``.  Negative eigenvalues are
    never part of the support.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank: int
    rank_threshold: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def support(self) -> np.ndarray:
        """Columns spanning the numerical support."""
        return self.eigenvectors[:, : self.rank]

    @property
    def kernel(self) -> np.ndarray:
        """Columns spanning the orthogonal complement of the support."""
        return self.eigenvectors[:, self.rank :]

    @property
    def negative_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[self.eigenvalues < 0]


def eigensym(a, rank_threshold: float = ANALYTIC_THRESHOLD) -> EigenSystem:
    """Eigendecomposition of a symmetric matrix with a numerical-rank decision."""
    _check_threshold(rank_threshold)
    a = sym_matrix(a)
    vals, vecs = np.linalg.eigh(a)
    order = np.argsort(vals, kind="stable")[::-1]
    vals = vals[order]
    vecs = _fix_signs(vecs[:, order])
    cutoff = rank_threshold * max(vals[0], 0.0)
    rank = int(np.count_nonzero(vals > cutoff))
    vals.flags.writeable = False
    vecs.flags.writeable = False
    return EigenSystem(vals, vecs, rank, rank_threshold)


def pinv(a, rank_threshold: float = ANALYTIC_THRESHOLD) -> np.ndarray:
    """Moore-Penrose pseudoinverse restricted to the numerical support."""
    es = eigensym(a, rank_threshold)
    u = es.support
    inv = (u / es.eigenvalues[: es.rank]) @ u.T
    return 0.5 * (inv + inv.T)


def support_projector(a, rank_threshold: float = ANALYTIC_THRESHOLD) -> np.ndarray:
    """Orthogonal projector onto the span of the retained eigenvectors.

    Full and zero rank give the exact identity and zero matrix.
    """
    es = eigensym(a, rank_threshold)
    if es.rank in (0, es.dim):
        return np.eye(es.dim) if es.rank else np.zeros((es.dim, es.dim))
    u = es.support
    proj = u @ u.T
    return 0.5 * (proj + proj.T)


def complement_basis(vectors) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(vectors)``.

    ``vectors`` is a single m-vector or an (r, m) array of row vectors.  The
    result has shape ``(m, m - rank)`` with basis vectors as columns; it is
    built by Gram-Schmidt over the candidates e_1, ..., e_m in order, so the
    output is deterministic.
    """
    vs = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vs.ndim != 2 or vs.shape[1] < 1:
        raise InvalidInput("vectors must be a non-empty list of m-vectors")
    if not np.all(np.isfinite(vs)):
        raise InvalidInput("vectors contain non-finite entries")
    m = vs.shape[1]
    u, s, _ = np.linalg.svd(vs.T, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise InvalidInput("cannot form a complement of the zero vector")
    r = int(np.count_nonzero(s > _SPAN_THRESHOLD * s[0]))
    basis = [u[:, i] for i in range(r)]
    out: list[np.ndarray] = []
    for j in range(m):
        if len(out) == m - r:
            break
        c = np.zeros(m)
        c[j] = 1.0
        for _ in range(2):  # re-orthogonalize once for stability
            for b in basis:
                c -= (b @ c) * b
        norm = np.linalg.norm(c)
        if norm > 1e-8:
            c /= norm
            basis.append(c)
            out.append(c)
    if len(out) != m - r:
        raise InvalidInput("failed to complete an orthonormal complement basis")
    if not out:
        return np.zeros((m, 0))
    return np.column_stack(out)


def is_orthogonal(o, tol: float = 1e-9) -> bool:
    o = np.asarray(o, dtype=float)
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        return False
    return bool(np.max(np.abs(o.T @ o - np.eye(o.shape[0]))) <= tol)


def to_json_dict(a) -> dict:
    """Matrix JSON layout ``{"dim": m, "rows": [[...], ...]}``."""
    a = sym_matrix(a)
    return {"dim": int(a.shape[0]), "rows": a.tolist()}


def from_json_dict(obj) -> np.ndarray:
    """Inverse of :func:`to_json_dict`; rejects relative asymmetry above 1e-6."""
    if not isinstance(obj, dict) or "dim" not in obj or "rows" not in obj:
        raise InvalidMatrix("matrix JSON must be an object with 'dim' and 'rows'")
    dim = obj["dim"]
    rows = obj["rows"]
    if not isinstance(dim, int) or dim < 1:
        raise InvalidMatrix("'dim' must be a positive integer")
    if not isinstance(rows, list) or len(rows) != dim or any(
        not isinstance(r, list) or len(r) != dim for r in rows
    ):
        raise InvalidMatrix(f"'rows' must be a {dim}x{dim} list of lists")
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidMatrix(f"non-numeric matrix entry: {exc}") from None
    return sym_matrix(arr, asym_tol=1e-6)
