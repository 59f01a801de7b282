"""Ensembles, measurements and the statistical games played on bipartite states.

Three payoffs are provided for a state ``rho_AB`` whose ``A`` side is measured
by a fixed family and whose ``B`` side is optimized:

* static guessing: ``max_Q sum_x Tr[(P_x (x) Q_x) rho]``
* decision game:   ``max_Q sum_x Tr[(O_x (x) Q_x) rho]`` with Hermitian ``O_x``
* decision problem: ``max_Q sum_{x,y} u(x,y) Tr[(P_x (x) Q_y) rho]``

Each reduces to a discrimination SDP over the steered operators
``Tr_A[(O (x) 1) rho]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .matkernel import TOL, ShapeError, as_cmat, matrix_rank, partial_trace, trace_norm


def _herm(m):
    m = as_cmat(m)
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True, eq=False)
class Ensemble:
    dim: int
    items: tuple

    def __post_init__(self):
        items = tuple((float(p), as_cmat(r)) for p, r in self.items)
        if not items:
            raise ValueError("ensemble must have at least one member")
        ps = np.array([p for p, _ in items])
        if np.any(ps < 0) or abs(ps.sum() - 1.0) > 1e-10:
            raise ValueError("ensemble probabilities must form a distribution")
        for _, r in items:
            if r.shape != (self.dim, self.dim):
                raise ShapeError(f"ensemble state must be {self.dim}x{self.dim}")
            if np.max(np.abs(r - r.conj().T)) > TOL.validation:
                raise ValueError("ensemble state is not Hermitian")
            if np.linalg.eigvalsh(_herm(r))[0] < -TOL.validation or abs(np.trace(r) - 1) > TOL.validation:
                raise ValueError("ensemble member is not a density matrix")
        object.__setattr__(self, "items", items)

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for p, _ in self.items])

    @property
    def states(self) -> list:
        return [r for _, r in self.items]

    def average(self) -> np.ndarray:
        return sum(p * r for p, r in self.items)


@dataclass(frozen=True, eq=False)
class Povm:
    dim: int
    elements: tuple

    def __post_init__(self):
        els = tuple(as_cmat(e) for e in self.elements)
        if not els:
            raise ValueError("POVM must have at least one element")
        for e in els:
            if e.shape != (self.dim, self.dim):
                raise ShapeError(f"POVM element must be {self.dim}x{self.dim}")
            if np.max(np.abs(e - e.conj().T)) > TOL.validation:
                raise ValueError("POVM element is not Hermitian")
            if np.linalg.eigvalsh(_herm(e))[0] < -TOL.validation:
                raise ValueError("POVM element is not PSD")
        s = sum(els)
        if np.max(np.abs(s - np.eye(self.dim))) > TOL.validation:
            raise ValueError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", els)

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True, eq=False)
class ObservableFamily:
    dim: int
    elements: tuple

    def __post_init__(self):
        els = tuple(as_cmat(e) for e in self.elements)
        if not els:
            raise ValueError("observable family must be non-empty")
        for e in els:
            if e.shape != (self.dim, self.dim):
                raise ShapeError(f"observable must be {self.dim}x{self.dim}")
            if np.max(np.abs(e - e.conj().T)) > TOL.reconstruction * max(1.0, np.max(np.abs(e))):
                raise ValueError("observable is not Hermitian")
        object.__setattr__(self, "elements", tuple(_herm(e) for e in els))

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True, eq=False)
class Utility:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or not np.all(np.isfinite(v)):
            raise ValueError("utility must be a finite real matrix")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class BipartiteState:
    dims: tuple
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        m = as_cmat(self.matrix)
        if len(dims) != 2 or m.shape != (dims[0] * dims[1],) * 2:
            raise ShapeError(f"matrix shape {m.shape} does not match dims {dims}")
        if np.max(np.abs(m - m.conj().T)) > TOL.validation:
            raise ValueError("state is not Hermitian")
        m = _herm(m)
        if np.linalg.eigvalsh(m)[0] < -TOL.validation or abs(np.real(np.trace(m)) - 1) > TOL.validation:
            raise ValueError("state is not a density matrix")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    def marginal(self, k: int) -> np.ndarray:
        return partial_trace(self.matrix, self.dims, k)


def steer(state: BipartiteState, op) -> np.ndarray:
    """``Tr_A[(op (x) 1) rho_AB]``."""
    da, db = state.dims
    t = state.matrix.reshape(da, db, da, db)
    return np.einsum("ca,abcd->bd", as_cmat(op), t)


def max_entangled(d: int) -> BipartiteState:
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1 / np.sqrt(d)
    return BipartiteState((d, d), np.outer(v, v.conj()))


def weyl(d: int, a: int, b: int) -> np.ndarray:
    """Weyl operator ``X^a Z^b`` (shift ``X|j> = |j+1>``, clock ``Z|j> = w^j |j>``)."""
    x = np.roll(np.eye(d), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)


def bell_unitaries(d: int) -> list:
    """Weyl operators in Bell-outcome order ``z = a*d + b``."""
    return [weyl(d, a, b) for a in range(d) for b in range(d)]


def bell_povm(d: int) -> Povm:
    """Projectors onto ``(W_z (x) 1)|Phi+>``, ordered as :func:`bell_unitaries`."""
    phi = np.zeros(d * d, dtype=complex)
    phi[:: d + 1] = 1 / np.sqrt(d)
    els = []
    for w in bell_unitaries(d):
        v = np.kron(w, np.eye(d)) @ phi
        els.append(np.outer(v, v.conj()))
    return Povm(d * d, els)


# ---------------------------------------------------------------------------
# payoffs

def _discriminate(ops, cfg):
    from . import sdp

    return sdp.discriminate(ops, cfg if cfg is not None else sdp.DEFAULT_CONFIG)


def static_guessing_payoff(rho: BipartiteState, p: Povm, cfg=None) -> tuple[float, Povm]:
    if p.dim != rho.dims[0]:
        raise ShapeError("POVM does not act on the A factor")
    res = _discriminate([steer(rho, e) for e in p.elements], cfg)
    return res.value, Povm(rho.dims[1], res.povm)


def decision_game_payoff(rho: BipartiteState, obs: ObservableFamily, cfg=None) -> float:
    if obs.dim != rho.dims[0]:
        raise ShapeError("observables do not act on the A factor")
    return _discriminate([steer(rho, e) for e in obs.elements], cfg).value


def observables_from_utility(p: Povm, u: Utility) -> ObservableFamily:
    """``O_y = sum_x u(x, y) P_x``."""
    if u.values.shape[0] != len(p):
        raise ShapeError("utility rows must match POVM outcomes")
    els = [sum(u.values[x, y] * p.elements[x] for x in range(len(p))) for y in range(u.values.shape[1])]
    return ObservableFamily(p.dim, els)


def decision_problem_payoff(rho: BipartiteState, p: Povm, u: Utility, cfg=None) -> float:
    if p.dim != rho.dims[0]:
        raise ShapeError("POVM does not act on the A factor")
    return decision_game_payoff(rho, observables_from_utility(p, u), cfg)


# ---------------------------------------------------------------------------
# conversions

def povm_from_observables(obs: ObservableFamily) -> tuple[Povm, float, np.ndarray]:
    """Affine shift of an observable family into a POVM.

    ``P_x = (O_x + lam 1 - Sigma/n) / (lam n)`` with ``Sigma = sum O_x``, ``n``
    the family size and the smallest ``lam`` keeping every ``P_x`` PSD.
    """
    n = len(obs)
    d = obs.dim
    sigma = sum(obs.elements)
    worst = max(-np.linalg.eigvalsh(o - sigma / n)[0] for o in obs.elements)
    lam = max(worst, 0.0) + 1e-12
    els = [(o + lam * np.eye(d) - sigma / n) / (lam * n) for o in obs.elements]
    # exact normalization: absorb rounding in the sum
    corr = (np.eye(d) - sum(els)) / n
    els = [e + corr for e in els]
    return Povm(d, els), float(lam), sigma


def observables_from_povm(p: Povm, lam: float, sigma) -> ObservableFamily:
    """Inverse of :func:`povm_from_observables`."""
    n = len(p)
    d = p.dim
    return ObservableFamily(d, [lam * n * e - lam * np.eye(d) + sigma / n for e in p.elements])


def complete_povm_from_positive_ops(ops: Sequence) -> Povm:
    """Scale PSD operators into a POVM and append the remainder ``1 - lam sum ops``."""
    ops = [_herm(o) for o in ops]
    d = ops[0].shape[0]
    if any(np.linalg.eigvalsh(o)[0] < -TOL.validation for o in ops):
        raise ValueError("operators must be PSD")
    s = sum(ops)
    top = np.linalg.eigvalsh(s)[-1]
    if top <= 0:
        raise ValueError("all operators are zero")
    lam = (1 - 1e-9) / top
    els = [lam * o for o in ops]
    rest = np.eye(d) - lam * s
    return Povm(d, els + [_herm(rest)])


def tomography_frame(d: int) -> list:
    """``|i><i|`` then projectors on ``(|i>+|j>)/sqrt2`` and ``(|i>+i|j>)/sqrt2`` for ``i<j``."""
    frame = []
    for i in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[i, i] = 1.0
        frame.append(m)
    for i in range(d):
        for j in range(i + 1, d):
            for ph in (1.0, 1j):
                v = np.zeros(d, dtype=complex)
                v[i] = 1 / np.sqrt(2)
                v[j] = ph / np.sqrt(2)
                frame.append(np.outer(v, v.conj()))
    return frame


def ic_povm(d: int) -> Povm:
    """Informationally complete POVM built from :func:`tomography_frame`."""
    if d == 1:
        return Povm(1, [np.eye(1)])
    return complete_povm_from_positive_ops(tomography_frame(d))


def ensemble_from_povm(p: Povm, c) -> Ensemble:
    """Ensemble steered by ``p`` on the Choi state of ``c``: ``p_x c(rho_x) = Tr_A[(P_x (x) 1) choi]``.

    Zero-trace elements are dropped.  ``c`` may also be an integer input dimension.
    """
    d = c if isinstance(c, (int, np.integer)) else c.dim_in
    if p.dim != d:
        raise ShapeError("POVM does not act on the channel input")
    items = []
    for e in p.elements:
        t = float(np.real(np.trace(e)))
        if t <= 1e-14:
            continue
        items.append((t / d, e.T / t))
    tot = sum(q for q, _ in items)
    items = [(q / tot, r) for q, r in items]
    return Ensemble(d, items)


def povm_from_ensemble(e: Ensemble) -> Povm:
    """``P_x = d p_x rho_x^T``; requires the ensemble average to be ``1/d``."""
    d = e.dim
    if np.max(np.abs(e.average() - np.eye(d) / d)) > TOL.validation:
        raise ValueError("ensemble average must be maximally mixed to come from steering")
    return Povm(d, [d * q * r.T for q, r in e.items])


def helstrom(p0: float, rho0, p1: float, rho1) -> float:
    """Optimal success probability for two hypotheses."""
    if abs(p0 + p1 - 1) > 1e-10 or p0 < 0 or p1 < 0:
        raise ValueError("priors must form a distribution")
    return 0.5 * (1 + trace_norm(p0 * as_cmat(rho0) - p1 * as_cmat(rho1)))


def steering_rank(state: BipartiteState, ops: Sequence | None = None) -> int:
    """Span dimension of ``{Tr_A[(P (x) 1) rho]}`` over ``ops`` (all operators if ``None``)."""
    from .channels import steering_matrix

    if ops is None:
        return matrix_rank(steering_matrix(state.matrix, *state.dims), 1e-9)
    vecs = np.array([steer(state, o).reshape(-1) for o in ops])
    return matrix_rank(vecs, 1e-9)


def payoff_ordering(rho: BipartiteState, sigma: BipartiteState, obs: ObservableFamily, cfg=None, tol=1e-7):
    """Compare ``rho`` and ``sigma`` on an observable game and on its shifted POVM.

    Returns ``(sign_obs, sign_povm, offsets)`` where the signs are -1/0/+1 and
    ``offsets`` holds ``lam n payoff_P - payoff_O`` for both states, which must
    coincide when the A-marginals agree.
    """
    p, lam, _ = povm_from_observables(obs)
    n = len(obs)
    vo = [decision_game_payoff(s, obs, cfg) for s in (rho, sigma)]
    vp = [static_guessing_payoff(s, p, cfg)[0] for s in (rho, sigma)]

    def sign(x, scale):
        return 0 if abs(x) <= tol * scale else int(np.sign(x))

    so = sign(vo[0] - vo[1], 1.0)
    sp = sign(vp[0] - vp[1], 1.0 / (lam * n))
    offsets = [lam * n * vp[k] - vo[k] for k in range(2)]
    return so, sp, offsets
