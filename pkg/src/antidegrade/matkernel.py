"""Dense complex-matrix primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Tensor factors
are ordered with the leftmost factor most significant, so for ``dims=(dA, dB)``
the basis vector ``|a>|b>`` sits at row ``a * dB + b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    validation: float = 1e-8
    reconstruction: float = 1e-10
    clamp: float = 1e-12


TOL = Tolerances()


class ShapeError(ValueError):
    """Raised when a matrix does not match the subsystem shape it is paired with."""


def as_cmat(m) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _check_shape(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ShapeError(f"subsystem dimensions must be positive, got {dims}")
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got {m.shape}")
    if int(np.prod(dims)) != m.shape[0]:
        raise ShapeError(f"dims {dims} do not factor a {m.shape[0]}-dimensional space")
    return dims


def tensor(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices."""
    out = as_cmat(mats[0])
    for m in mats[1:]:
        out = np.kron(out, as_cmat(m))
    return out


def partial_trace(m, dims: Sequence[int], keep: Sequence[int] | int) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    The kept factors stay in their original order.
    """
    m = as_cmat(m)
    dims = _check_shape(m, dims)
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise ShapeError(f"keep indices {keep} out of range for {n} factors")
    t = m.reshape(dims + dims)
    # einsum letters: row index i_k, column index j_k; traced factors share a letter
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = list(letters[:n])
    cols = [letters[n + k] if k in keep else rows[k] for k in range(n)]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    res = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return res.reshape(dk, dk)


def partial_transpose(m, dims: Sequence[int], which: Sequence[int] | int) -> np.ndarray:
    """Transpose the listed factors in the computational basis."""
    m = as_cmat(m)
    dims = _check_shape(m, dims)
    if isinstance(which, (int, np.integer)):
        which = [int(which)]
    n = len(dims)
    t = m.reshape(dims + dims)
    perm = list(range(2 * n))
    for k in which:
        if k < 0 or k >= n:
            raise ShapeError(f"factor {k} out of range for {n} factors")
        perm[k], perm[n + k] = perm[n + k], perm[k]
    d = m.shape[0]
    return t.transpose(perm).reshape(d, d)


def permute_systems(m, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: factor ``order[k]`` of the input becomes factor ``k``."""
    m = as_cmat(m)
    dims = _check_shape(m, dims)
    n = len(dims)
    order = [int(k) for k in order]
    if sorted(order) != list(range(n)):
        raise ShapeError(f"{order} is not a permutation of {n} factors")
    t = m.reshape(dims + dims)
    d = m.shape[0]
    return t.transpose(order + [n + k for k in order]).reshape(d, d)


def embed(op, dims: Sequence[int], systems: Sequence[int]) -> np.ndarray:
    """Lift ``op`` acting on ``systems`` to the full space, identity elsewhere."""
    op = as_cmat(op)
    dims = tuple(int(d) for d in dims)
    systems = [int(s) for s in systems]
    rest = [k for k in range(len(dims)) if k not in systems]
    drest = int(np.prod([dims[k] for k in rest])) if rest else 1
    full = np.kron(op, np.eye(drest))
    cur = [dims[k] for k in systems] + [dims[k] for k in rest]
    src = systems + rest
    # factor k of the target is factor src.index(k) of ``full``
    order = [src.index(k) for k in range(len(dims))]
    return permute_systems(full, cur, order)


def is_hermitian(m, tol: float = TOL.reconstruction) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= tol * max(
        1.0, np.max(np.abs(m), initial=0.0)
    )


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvector columns of a Hermitian matrix."""
    m = as_cmat(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got {m.shape}")
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian within tolerance")
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    return w[::-1].copy(), v[:, ::-1].copy()


def trace_norm(m) -> float:
    """Sum of singular values."""
    m = as_cmat(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got {m.shape}")
    if is_hermitian(m, 1e-14):
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def psd_project(m) -> np.ndarray:
    """Nearest positive-semidefinite matrix in Frobenius norm."""
    w, v = hermitian_eig(m)
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def min_eig(m) -> float:
    m = as_cmat(m)
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


def is_psd(m, tol: float = TOL.validation) -> bool:
    return min_eig(m) >= -tol


def sqrtm_psd(m, inverse: bool = False) -> np.ndarray:
    """Matrix square root (or inverse square root) of a PSD matrix."""
    w, v = np.linalg.eigh(0.5 * (m + np.conj(m).T))
    w = np.clip(w, 0.0, None)
    if inverse:
        if np.min(w) <= 0:
            raise np.linalg.LinAlgError("matrix is singular")
        w = 1.0 / np.sqrt(w)
    else:
        w = np.sqrt(w)
    return (v * w) @ v.conj().T


def matrix_rank(m, rel: float = 1e-9) -> int:
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel * s[0]))


def ket(d: int, i: int) -> np.ndarray:
    v = np.zeros((d, 1), dtype=complex)
    v[i, 0] = 1.0
    return v


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1, 1)
    return v @ v.conj().T


# ---------------------------------------------------------------------------
# real isometric coordinates for Hermitian matrices

def svec_size(n: int) -> int:
    return n * n


def svec(h) -> np.ndarray:
    """Real coordinates of a Hermitian matrix: diagonal, then sqrt(2) Re / Im of the upper triangle.

    ``svec(a) @ svec(b) == Re Tr[a b]`` for Hermitian ``a``, ``b``.
    """
    h = np.asarray(h)
    n = h.shape[0]
    iu = np.triu_indices(n, 1)
    up = h[iu]
    return np.concatenate([np.real(np.diag(h)), np.sqrt(2) * np.real(up), np.sqrt(2) * np.imag(up)])


def smat(v, n: int) -> np.ndarray:
    """Inverse of :func:`svec`."""
    v = np.asarray(v, dtype=float)
    h = np.zeros((n, n), dtype=complex)
    h[np.diag_indices(n)] = v[:n]
    iu = np.triu_indices(n, 1)
    k = len(iu[0])
    up = (v[n : n + k] + 1j * v[n + k : n + 2 * k]) / np.sqrt(2)
    h[iu] = up
    h[(iu[1], iu[0])] = np.conj(up)
    return h


@lru_cache(maxsize=64)
def _hermitian_basis(n: int) -> np.ndarray:
    b = np.array([smat(e, n) for e in np.eye(n * n)])
    b.flags.writeable = False
    return b


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal Hermitian basis matching :func:`svec` coordinates, shape ``(n*n, n, n)``."""
    return _hermitian_basis(int(n))


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (g + g.conj().T)


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = n if rank is None else rank
    g = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    r = g @ g.conj().T
    return r / np.real(np.trace(r))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
