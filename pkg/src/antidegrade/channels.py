"""Quantum channels stored as normalized Choi states.

A channel ``N: L(H_A) -> L(H_B)`` is kept as ``choi = (id (x) N)(|Phi+><Phi+|)``,
a trace-one state on ``H_A (x) H_B`` whose ``A`` marginal is ``1/d_A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .matkernel import (
    TOL,
    ShapeError,
    as_cmat,
    hermitian_eig,
    matrix_rank,
    partial_trace,
    permute_systems,
)


class ChannelError(ValueError):
    """A matrix or operator list does not describe a valid CPTP map."""


@dataclass(frozen=True, eq=False)
class Channel:
    dim_in: int
    dim_out: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        choi = as_cmat(self.choi)
        d = self.dim_in * self.dim_out
        if self.dim_in < 1 or self.dim_out < 1:
            raise ChannelError("channel dimensions must be positive")
        if choi.shape != (d, d):
            raise ChannelError(f"Choi matrix must be {d}x{d}, got {choi.shape}")
        if np.max(np.abs(choi - choi.conj().T)) > TOL.validation:
            raise ChannelError("Choi matrix is not Hermitian")
        choi = 0.5 * (choi + choi.conj().T)
        w = np.linalg.eigvalsh(choi)
        if w[0] < -TOL.validation:
            raise ChannelError(f"Choi matrix is not PSD (min eigenvalue {w[0]:.3e}): map is not CP")
        if abs(np.real(np.trace(choi)) - 1.0) > TOL.validation:
            raise ChannelError("Choi matrix must have unit trace")
        marg = partial_trace(choi, (self.dim_in, self.dim_out), [0])
        if np.max(np.abs(marg - np.eye(self.dim_in) / self.dim_in)) > TOL.validation:
            raise ChannelError("input marginal of the Choi state is not 1/d_A: map is not trace preserving")
        choi.setflags(write=False)
        object.__setattr__(self, "choi", choi)

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)

    def __repr__(self):
        return f"Channel(dim_in={self.dim_in}, dim_out={self.dim_out})"


@dataclass(frozen=True, eq=False)
class KrausRep:
    operators: tuple

    def __post_init__(self):
        ops = tuple(as_cmat(k) for k in self.operators)
        if not ops:
            raise ChannelError("at least one Kraus operator is required")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise ChannelError("Kraus operators must share a shape")
        object.__setattr__(self, "operators", ops)

    @property
    def dim_in(self) -> int:
        return self.operators[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.operators[0].shape[0]

    def completeness_error(self) -> float:
        s = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(s - np.eye(self.dim_in))))


@dataclass(frozen=True, eq=False)
class StinespringRep:
    isometry: np.ndarray
    dim_out: int
    dim_env: int

    @property
    def dim_in(self) -> int:
        return self.isometry.shape[1]


# ---------------------------------------------------------------------------
# conversions

def from_kraus(k) -> Channel:
    if not isinstance(k, KrausRep):
        k = KrausRep(tuple(k))
    err = k.completeness_error()
    if err > TOL.validation:
        raise ChannelError(f"Kraus completeness violated by {err:.3e}")
    da, db = k.dim_in, k.dim_out
    # |K>> = sum_a |a> (x) K|a>, stored a-major
    vecs = np.array([op.T.reshape(-1) for op in k.operators])
    choi = vecs.T @ vecs.conj() / da
    return Channel(da, db, choi)


def from_choi(choi, dim_in: int, dim_out: int | None = None) -> Channel:
    choi = as_cmat(choi)
    if dim_out is None:
        if choi.shape[0] % dim_in:
            raise ShapeError("Choi size is not a multiple of dim_in")
        dim_out = choi.shape[0] // dim_in
    return Channel(int(dim_in), int(dim_out), choi)


def to_kraus(c: Channel) -> KrausRep:
    """Canonical Kraus operators from the spectral decomposition of ``d_A * choi``.

    Ordered by decreasing weight; eigenvalues below ``1e-12`` are dropped.
    """
    w, v = hermitian_eig(c.dim_in * c.choi)
    ops = []
    for lam, vec in zip(w, v.T):
        if lam < TOL.clamp:
            continue
        k = np.sqrt(lam) * vec.reshape(c.dim_in, c.dim_out).T
        # fix the global phase so the largest-modulus entry is real positive
        idx = np.argmax(np.abs(k))
        k = k * (np.conj(k.flat[idx]) / abs(k.flat[idx]))
        ops.append(k)
    return KrausRep(tuple(ops))


def stinespring(c: Channel) -> StinespringRep:
    """``V = sum_k K_k (x) |k>_E`` built from :func:`to_kraus`."""
    ops = to_kraus(c).operators
    de = len(ops)
    v = np.zeros((c.dim_out * de, c.dim_in), dtype=complex)
    for k, op in enumerate(ops):
        v[k::de, :] = op
    return StinespringRep(v, c.dim_out, de)


def complementary(c: Channel) -> Channel:
    """Environment channel ``Tr_B[V X V^dag]`` of the canonical dilation."""
    ops = to_kraus(c).operators
    de = len(ops)
    # env Kraus operator F_b has rows K_k[b, :]
    stack = np.array(ops)  # (k, b, a)
    env_ops = [stack[:, b, :].reshape(de, c.dim_in) for b in range(c.dim_out)]
    env_ops = [f for f in env_ops if np.max(np.abs(f)) > 0]
    return from_kraus(env_ops)


def apply(c: Channel, rho) -> np.ndarray:
    """``N(X) = d_A Tr_A[(X^T (x) 1) choi]``."""
    rho = as_cmat(rho)
    if rho.shape != (c.dim_in, c.dim_in):
        raise ShapeError(f"input must be {c.dim_in}x{c.dim_in}, got {rho.shape}")
    j = c.choi.reshape(c.dim_in, c.dim_out, c.dim_in, c.dim_out)
    return c.dim_in * np.einsum("ca,cbad->bd", rho, j)


def apply_local(c: Channel, rho, dims: Sequence[int], system: int) -> np.ndarray:
    """Apply ``c`` to factor ``system`` of a multipartite operator."""
    rho = as_cmat(rho)
    dims = [int(d) for d in dims]
    if dims[system] != c.dim_in:
        raise ShapeError("channel input does not match the addressed factor")
    n = len(dims)
    t = rho.reshape(dims + dims)
    j = c.choi.reshape(c.dim_in, c.dim_out, c.dim_in, c.dim_out)
    # out[.., e, .., .., f, ..] = d sum_{b,b2} t[.., b, .., .., b2, ..] j[b, e, b2, f]
    t = np.moveaxis(t, [system, n + system], [0, 1])
    out = c.dim_in * np.einsum("xy...,xeyf->ef...", t, j)
    out = np.moveaxis(out, [0, 1], [system, n + system])
    new = list(dims)
    new[system] = c.dim_out
    d = int(np.prod(new))
    return out.reshape(d, d)


def compose(d: Channel, n: Channel) -> Channel:
    """``d o n`` (apply ``n`` first)."""
    if d.dim_in != n.dim_out:
        raise ShapeError(f"cannot compose: {d.dim_in} != {n.dim_out}")
    choi = apply_local(d, n.choi, (n.dim_in, n.dim_out), 1)
    return Channel(n.dim_in, d.dim_out, choi)


def tensor_channels(a: Channel, b: Channel) -> Channel:
    """Parallel use ``a (x) b`` with input ``A A0`` and output ``B B0``."""
    j = np.kron(a.choi, b.choi)
    j = permute_systems(j, (a.dim_in, a.dim_out, b.dim_in, b.dim_out), (0, 2, 1, 3))
    return Channel(a.dim_in * b.dim_in, a.dim_out * b.dim_out, j)


def mixture(channels: Sequence[Channel], probs: Sequence[float]) -> Channel:
    _check_family(channels, probs)
    choi = sum(p * c.choi for p, c in zip(probs, channels))
    return Channel(channels[0].dim_in, channels[0].dim_out, choi)


def flagged_mixture(channels: Sequence[Channel], probs: Sequence[float]) -> Channel:
    """``sum_i p_i N_i (x) |i><i|`` with output ordering ``B`` then flag."""
    _check_family(channels, probs)
    n = len(channels)
    da, db = channels[0].dim_in, channels[0].dim_out
    choi = np.zeros((da * db * n, da * db * n), dtype=complex)
    for i, (p, c) in enumerate(zip(probs, channels)):
        flag = np.zeros((n, n))
        flag[i, i] = 1.0
        choi += p * np.kron(c.choi, flag)
    return Channel(da, db * n, choi)


def trace_out_flag(dim_out: int, n_flags: int) -> Channel:
    """Discard the classical flag appended by :func:`flagged_mixture`."""
    ops = []
    for i in range(n_flags):
        k = np.zeros((dim_out, dim_out * n_flags), dtype=complex)
        for b in range(dim_out):
            k[b, b * n_flags + i] = 1.0
        ops.append(k)
    return from_kraus(ops)


def _check_family(channels, probs):
    if not channels:
        raise ChannelError("empty channel list")
    if len(channels) != len(probs):
        raise ChannelError("one probability per channel is required")
    p = np.asarray(probs, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
        raise ChannelError("probabilities must form a distribution")
    da, db = channels[0].dim_in, channels[0].dim_out
    if any(c.dim_in != da or c.dim_out != db for c in channels):
        raise ShapeError("all channels must share input and output dimensions")


# ---------------------------------------------------------------------------
# zoo

def identity_channel(d: int = 2) -> Channel:
    return from_kraus([np.eye(d)])


def unitary_channel(u) -> Channel:
    return from_kraus([as_cmat(u)])


def constant_channel(dim_in: int = 2, state=None) -> Channel:
    """Replace every input by ``state`` (default ``|0><0|`` on one qubit)."""
    if state is None:
        state = np.diag([1.0, 0.0])
    state = as_cmat(state)
    return Channel(dim_in, state.shape[0], np.kron(np.eye(dim_in) / dim_in, state))


def _check_param(name, v):
    if not (0.0 <= v <= 1.0):
        raise ChannelError(f"{name} must lie in [0, 1], got {v}")


def erasure(p: float, d: int = 2) -> Channel:
    """Qudit erasure channel; the flag is the extra basis vector ``|d>``."""
    _check_param("p", p)
    keep = np.zeros((d + 1, d), dtype=complex)
    keep[:d, :d] = np.eye(d)
    ops = [np.sqrt(1 - p) * keep]
    for i in range(d):
        k = np.zeros((d + 1, d), dtype=complex)
        k[d, i] = np.sqrt(p)
        ops.append(k)
    return from_kraus(ops)


def further_erasure(q: float, d: int = 2) -> Channel:
    """Erase the data part of an erasure-channel output with probability ``q``; flag kept."""
    _check_param("q", q)
    keep = np.eye(d + 1, dtype=complex)
    keep[d, d] = 0.0
    flag = np.zeros((d + 1, d + 1), dtype=complex)
    flag[d, d] = 1.0
    ops = [np.sqrt(1 - q) * keep, flag]
    for i in range(d):
        k = np.zeros((d + 1, d + 1), dtype=complex)
        k[d, i] = np.sqrt(q)
        ops.append(k)
    return from_kraus(ops)


def amplitude_damping(gamma: float) -> Channel:
    _check_param("gamma", gamma)
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return from_kraus([k0, k1])


def depolarizing(p: float, d: int = 2) -> Channel:
    """``X -> (1 - p) X + p Tr[X] 1/d``."""
    _check_param("p", p)
    phi = np.zeros((d * d, 1), dtype=complex)
    for i in range(d):
        phi[i * d + i] = 1 / np.sqrt(d)
    choi = (1 - p) * (phi @ phi.conj().T) + p * np.eye(d * d) / (d * d)
    return Channel(d, d, choi)


def symmetric_basis(d: int) -> np.ndarray:
    """Columns span the symmetric subspace of ``C^d (x) C^d``.

    Order: ``|ii>`` for ascending ``i``, then ``(|ij> + |ji>)/sqrt(2)`` for ``i < j``.
    """
    cols = []
    for i in range(d):
        v = np.zeros(d * d, dtype=complex)
        v[i * d + i] = 1.0
        cols.append(v)
    for i in range(d):
        for j in range(i + 1, d):
            v = np.zeros(d * d, dtype=complex)
            v[i * d + j] = v[j * d + i] = 1 / np.sqrt(2)
            cols.append(v)
    return np.array(cols).T


def symmetric_channel(d: int) -> Channel:
    """``d``-dimensional symmetric channel: input of dimension ``d(d+1)/2`` mapped into the symmetric subspace, environment traced."""
    if d < 2:
        raise ChannelError("symmetric channel needs d >= 2")
    v = symmetric_basis(d)  # (d*d, n) isometry into B (x) E
    n = v.shape[1]
    ops = [v[e::d, :] for e in range(d)]  # rows with environment index e
    c = from_kraus(ops)
    assert c.dim_in == n
    return c


def random_channel(dim_in: int, dim_out: int, rng: np.random.Generator, n_kraus: int | None = None) -> Channel:
    """Channel from a Haar-like random isometry ``H_A -> H_B (x) C^k``."""
    k = n_kraus if n_kraus is not None else dim_in * dim_out
    g = rng.normal(size=(dim_out * k, dim_in)) + 1j * rng.normal(size=(dim_out * k, dim_in))
    q, _ = np.linalg.qr(g)
    ops = [q[i::k, :] for i in range(k)]
    return from_kraus(ops)


# ---------------------------------------------------------------------------
# completeness

def steering_matrix(choi, dim_a: int, dim_b: int) -> np.ndarray:
    """Matrix of the linear map ``P -> Tr_A[(P (x) 1) rho]`` in the matrix-unit basis."""
    j = as_cmat(choi).reshape(dim_a, dim_b, dim_a, dim_b)
    # Tr_A[(|c><a| (x) 1) rho] = rho[a, :, c, :]
    return j.transpose(1, 3, 2, 0).reshape(dim_b * dim_b, dim_a * dim_a)


def is_complete_channel(c: Channel) -> tuple[int, bool]:
    """Span dimension of the channel's range and whether it equals ``d_B^2``."""
    r = matrix_rank(steering_matrix(c.choi, c.dim_in, c.dim_out), 1e-9)
    return r, r == c.dim_out**2
