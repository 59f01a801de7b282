"""Small conic solver over Hermitian PSD blocks and the SDPs built on it.

Variables are stacked ``svec`` coordinates of Hermitian blocks (see
:func:`antidegrade.matkernel.svec`).  The solver handles

    minimize  <c, x> + (w/2) ||L x - j||^2   subject to  A x = b,  x in K

where ``K`` is a product of PSD cones and free blocks.  It runs over-relaxed
ADMM: an affine step onto ``{A x = b}`` through a prefactored SVD, a cone step
by per-block eigenvalue clamping, adaptive penalty ``rho``.  Certificates
(primal/dual residuals) are recomputed from the returned blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernel
from .matkernel import hermitian_basis, partial_trace, psd_project, smat, sqrtm_psd, svec, trace_norm

PSD = "psd"
FREE = "free"


@dataclass(frozen=True)
class SolverConfig:
    eps_abs: float = 1e-9
    status_tol: float = 1e-8
    max_iters: int = 100_000
    rho: float = 1.0
    alpha: float = 1.5
    chunk: int = 25
    adaptive_rho: bool = True
    backend: str | None = None


DEFAULT_CONFIG = SolverConfig()


@dataclass
class SdpSolution:
    blocks: list
    objective: float
    primal_residual: float
    dual_residual: float
    status: str
    iterations: int
    duals: list = field(default_factory=list)
    state: tuple | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _as_herm_output(val):
    a = np.asarray(val, dtype=complex)
    if a.ndim == 0:
        return a.reshape(1, 1)
    return a


class ConicProblem:
    """Builder for a conic program over Hermitian blocks.

    ``add_block`` returns an integer handle.  Linear maps passed to
    ``add_objective``/``add_constraint``/``set_quadratic`` may be ``None``
    (identity), a callable taking a Hermitian matrix to a Hermitian matrix or a
    scalar, or a real matrix acting on the block's svec coordinates.
    """

    def __init__(self, sense: str = "min"):
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self.sense = sense
        self.sizes: list[int] = []
        self.kinds: list[str] = []
        self._c: dict[int, np.ndarray] = {}
        self._constraints: list[tuple[dict, np.ndarray, int]] = []
        self._quad = None

    def add_block(self, n: int, kind: str = PSD) -> int:
        if n < 1:
            raise ValueError("block size must be positive")
        if kind not in (PSD, FREE):
            raise ValueError(f"unknown block kind {kind!r}")
        self.sizes.append(int(n))
        self.kinds.append(kind)
        return len(self.sizes) - 1

    def _map_matrix(self, block: int, m) -> np.ndarray:
        n = self.sizes[block]
        if m is None:
            return np.eye(n * n)
        if callable(m):
            cols = []
            for e in hermitian_basis(n):
                out = _as_herm_output(m(e))
                if out.shape[0] == 1:
                    cols.append(np.array([np.real(out[0, 0])]))
                else:
                    cols.append(svec(out))
            return np.array(cols).T
        a = np.asarray(m, dtype=float)
        if a.ndim != 2 or a.shape[1] != n * n:
            raise ValueError(f"map matrix must have {n * n} columns")
        return a

    def add_objective(self, block: int, coeff) -> None:
        """Add ``Re Tr[coeff X_block]`` to the objective."""
        n = self.sizes[block]
        c = _as_herm_output(coeff)
        if c.shape != (n, n):
            raise ValueError("objective coefficient has wrong shape")
        c = 0.5 * (c + c.conj().T)
        self._c[block] = self._c.get(block, 0.0) + svec(c)

    def add_constraint(self, terms: dict, rhs) -> int:
        """Add ``sum_k map_k(X_k) = rhs``; ``rhs`` is a Hermitian matrix, a scalar or a real vector."""
        mats = {b: self._map_matrix(b, m) for b, m in terms.items()}
        r = np.asarray(rhs)
        if np.iscomplexobj(r) or (r.ndim == 2 and r.shape[0] == r.shape[1] and r.shape[0] > 1):
            r = _as_herm_output(r)
            out_n = r.shape[0]
            vec = svec(r) if out_n > 1 else np.array([np.real(r[0, 0])])
        else:
            vec = np.atleast_1d(np.asarray(r, dtype=float)).ravel()
            out_n = 0
        for b, a in mats.items():
            if a.shape[0] != vec.size:
                raise ValueError(f"constraint map on block {b} has {a.shape[0]} rows, rhs has {vec.size}")
        self._constraints.append((mats, vec, out_n))
        return len(self._constraints) - 1

    def set_quadratic(self, terms: dict, target, weight: float = 1.0) -> None:
        """Add ``(weight/2) ||sum_k L_k(X_k) - target||_F^2`` to a minimization objective."""
        t = _as_herm_output(target)
        vec = svec(t) if t.shape[0] > 1 else np.array([np.real(t[0, 0])])
        mats = {b: self._map_matrix(b, m) for b, m in terms.items()}
        self._quad = (mats, vec, float(weight))

    # -- assembly -------------------------------------------------------------
    def _layout(self):
        n2 = np.array([n * n for n in self.sizes], dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(n2)[:-1]]).astype(np.int64)
        return offsets, int(n2.sum())

    def assemble(self):
        offsets, N = self._layout()
        c = np.zeros(N)
        for b, v in self._c.items():
            c[offsets[b] : offsets[b] + v.size] += v
        if self.sense == "max":
            c = -c
        rows = []
        bs = []
        for mats, vec, _ in self._constraints:
            a = np.zeros((vec.size, N))
            for b, m in mats.items():
                a[:, offsets[b] : offsets[b] + m.shape[1]] += m
            rows.append(a)
            bs.append(vec)
        A = np.vstack(rows) if rows else np.zeros((0, N))
        b = np.concatenate(bs) if bs else np.zeros(0)
        L = j = None
        w = 0.0
        if self._quad is not None:
            mats, j, w = self._quad
            L = np.zeros((j.size, N))
            for blk, m in mats.items():
                L[:, offsets[blk] : offsets[blk] + m.shape[1]] += m
        return c, A, b, L, j, w, offsets


def _dual_residual(g, z, offsets, sizes, kinds):
    worst = 0.0
    for o, n, k in zip(offsets, sizes, kinds):
        gb = g[o : o + n * n]
        if k == _kernel.KIND_FREE:
            worst = max(worst, float(np.max(np.abs(gb), initial=0.0)))
        elif n == 1:
            worst = max(worst, max(0.0, -float(gb[0])))
        else:
            lam = np.linalg.eigvalsh(smat(gb, n))[0]
            worst = max(worst, max(0.0, -float(lam)))
    return max(worst, abs(float(g @ z)))


def solve(prob: ConicProblem, cfg: SolverConfig = DEFAULT_CONFIG, warm: tuple | None = None) -> SdpSolution:
    """Solve ``prob``; deterministic for fixed inputs and ``cfg``."""
    kern = _kernel.get(cfg.backend)
    c, A, b, L, j, w, offsets = prob.assemble()
    N = c.size
    sizes = np.array(prob.sizes, dtype=np.int64)
    kinds = np.array([_kernel.KIND_PSD if k == PSD else _kernel.KIND_FREE for k in prob.kinds], dtype=np.int64)

    # equality structure
    if A.shape[0]:
        Uu, s, Vt = np.linalg.svd(A, full_matrices=False)
        r = int(np.sum(s > 1e-10 * s[0])) if s.size and s[0] > 0 else 0
    else:
        Uu, s, Vt, r = np.zeros((0, 0)), np.zeros(0), np.zeros((0, N)), 0
    Q = Vt[:r].T
    x0 = Q @ ((Uu[:, :r].T @ b) / s[:r]) if r else np.zeros(N)
    if A.shape[0]:
        incons = np.linalg.norm(A @ x0 - b, np.inf)
        if incons > 1e-9 * (1.0 + np.linalg.norm(b, np.inf)):
            blocks = [smat(np.zeros(n * n), n) if n > 1 else 0.0 for n in prob.sizes]
            return SdpSolution(blocks, float("nan"), float(incons), float("inf"), "infeasible_hint", 0)

    H = None
    f0 = c.copy()
    if L is not None:
        H = w * (L.T @ L)
        f0 = c - w * (L.T @ j)

    quad = H is not None
    use_range = (not quad) and r <= N - r
    Nn = None
    if not use_range:
        # orthonormal basis of the null space of A
        Nn = np.linalg.svd(A, full_matrices=True)[2][r:].T if r else np.eye(N)
    if quad:
        Hn = Nn.T @ H @ Nn
        lamH, EH = np.linalg.eigh(0.5 * (Hn + Hn.T))
        lamH = np.maximum(lamH, 0.0)
        NnE = Nn @ EH
        Hx0f = Nn.T @ (H @ x0 + f0)
        Hx0f_e = EH.T @ Hx0f

    def factor(rho):
        if quad:
            kd = 1.0 / (lamH + rho)
            U = NnE * (rho * kd)
            V = NnE
            h = x0 - NnE @ (kd * Hx0f_e)
            return 0.0, U, V, h
        if use_range:
            h = -(f0 - Q @ (Q.T @ f0)) / rho + x0
            return 1.0, -Q, Q, h
        h = x0 - Nn @ (Nn.T @ f0) / rho
        return 0.0, Nn, Nn, h

    rho = cfg.rho
    if warm is not None:
        z = warm[0].copy()
        u = warm[1].copy()
        rho = warm[2]
    else:
        z = np.zeros(N)
        u = np.zeros(N)
    x = np.zeros(N)
    a, U, V, h = factor(rho)
    U = np.ascontiguousarray(U)
    V = np.ascontiguousarray(V)

    def certify(zv):
        grad = f0 + (H @ zv if quad else 0.0)
        s_ = -rho * u
        if r:
            # y minimizes ||A^T y - (grad - s)||
            y = Uu[:, :r] @ ((Q.T @ (grad - s_)) / s[:r])
            g = grad - A.T @ y
        else:
            y = np.zeros(A.shape[0])
            g = grad
        pres = float(np.linalg.norm(A @ zv - b, np.inf)) if A.shape[0] else 0.0
        dres = _dual_residual(g, zv, offsets, sizes, kinds)
        return pres, dres, y

    it = 0
    eps = cfg.eps_abs
    status = "max_iters"
    pres = dres = float("inf")
    y = np.zeros(A.shape[0])
    while it < cfg.max_iters:
        n_it = min(cfg.chunk, cfg.max_iters - it)
        rp, rd = kern.run_chunk(x, z, u, a, U, V, h, offsets, sizes, kinds, cfg.alpha, n_it)
        it += n_it
        if not (np.isfinite(rp) and np.isfinite(rd)):
            break
        if rp <= eps and rho * rd <= eps:
            pres, dres, y = certify(z)
            if pres <= cfg.status_tol and dres <= cfg.status_tol:
                status = "optimal"
                break
            eps = max(eps * 0.1, 1e-15)
        if cfg.adaptive_rho:
            nx = max(np.linalg.norm(x, np.inf), np.linalg.norm(z, np.inf), 1e-12)
            nu = max(rho * np.linalg.norm(u, np.inf), 1e-12)
            prel = rp / nx
            drel = rho * rd / nu
            if prel > 0 and drel > 0:
                ratio = np.sqrt(prel / drel)
                if ratio > 5.0 or ratio < 0.2:
                    new = float(np.clip(rho * ratio, 1e-6, 1e6))
                    u *= rho / new
                    rho = new
                    a, U, V, h = factor(rho)
                    U = np.ascontiguousarray(U)
                    V = np.ascontiguousarray(V)
    if status != "optimal":
        pres, dres, y = certify(z)

    blocks = [smat(z[o : o + n * n], n) if n > 1 else float(z[o]) for o, n in zip(offsets, prob.sizes)]
    obj = float(c @ z)
    if quad:
        obj += 0.5 * w * float(np.sum((L @ z - j) ** 2))
    if prob.sense == "max":
        obj = -obj
        y = -y
    duals = []
    pos = 0
    for _, vec, out_n in prob._constraints:
        seg = y[pos : pos + vec.size]
        pos += vec.size
        if out_n > 1:
            duals.append(smat(seg, out_n))
        elif out_n == 1:
            duals.append(float(seg[0]))
        else:
            duals.append(seg.copy())
    return SdpSolution(blocks, obj, pres, dres, status, it, duals, (z.copy(), u.copy(), rho))


# ---------------------------------------------------------------------------
# minimum-error discrimination

@dataclass
class Discrimination:
    value: float
    povm: list
    dual: np.ndarray
    upper: float
    solution: SdpSolution

    @property
    def gap(self) -> float:
        return self.upper - self.value


def polish_povm(elements) -> list:
    """Clamp to PSD and renormalize so the elements sum to the identity exactly."""
    els = [psd_project(0.5 * (e + e.conj().T)) for e in elements]
    s = sum(els)
    try:
        t = sqrtm_psd(s, inverse=True)
    except np.linalg.LinAlgError:
        d = s.shape[0]
        els = [e + (np.eye(d) - s) / len(els) for e in els]
        els = [psd_project(e) for e in els]
        t = sqrtm_psd(sum(els), inverse=True)
    out = [t @ e @ t for e in els]
    return [0.5 * (o + o.conj().T) for o in out]


def discriminate(ops: Sequence[np.ndarray], cfg: SolverConfig = DEFAULT_CONFIG, warm=None) -> Discrimination:
    """Maximize ``sum_x Re Tr[P_x C_x]`` over POVMs ``{P_x}``.

    ``ops`` may be arbitrary Hermitian operators.  Returns the value of the
    polished POVM together with a dual operator ``Y`` shifted so that
    ``Y >= C_x`` holds exactly; ``Tr Y`` is then a certified upper bound.
    """
    ops = [0.5 * (np.asarray(o, dtype=complex) + np.asarray(o, dtype=complex).conj().T) for o in ops]
    d = ops[0].shape[0]
    if any(o.shape != (d, d) for o in ops):
        raise ValueError("all operators must share one dimension")
    prob = ConicProblem("max")
    hs = [prob.add_block(d) for _ in ops]
    for hb, o in zip(hs, ops):
        prob.add_objective(hb, o)
    prob.add_constraint({hb: None for hb in hs}, np.eye(d, dtype=complex))
    sol = solve(prob, cfg, warm)
    blocks = [sol.blocks[hb] if d > 1 else np.array([[sol.blocks[hb]]], dtype=complex) for hb in hs]
    povm = polish_povm(blocks)
    value = float(sum(np.real(np.trace(p @ o)) for p, o in zip(povm, ops)))
    y = sol.duals[0]
    y = np.array([[y]], dtype=complex) if np.isscalar(y) else np.asarray(y, dtype=complex)
    shift = max(float(np.linalg.eigvalsh(o - y)[-1]) for o in ops)
    y = y + shift * np.eye(d)
    upper = float(np.real(np.trace(y)))
    return Discrimination(value, povm, y, upper, sol)


def guessing_probability(channel, ensemble, cfg: SolverConfig = DEFAULT_CONFIG):
    """Optimal success probability of guessing the label of ``ensemble`` sent through ``channel``.

    Returns ``(pstar, povm, dual)`` with ``dual >= p_x N(rho_x)`` for every ``x``.
    """
    from .games import Povm

    if ensemble.dim != channel.dim_in:
        raise ValueError(f"ensemble dimension {ensemble.dim} != channel input {channel.dim_in}")
    ops = [p * channel(rho) for p, rho in ensemble.items]
    res = discriminate(ops, cfg)
    return res.value, Povm(channel.dim_out, res.povm), res.dual


# ---------------------------------------------------------------------------
# degradability

def link(state, degrader_choi, dims, dim_out):
    """``(id_A (x) D)(state)`` with ``D`` given by its normalized Choi matrix on ``B (x) B'``."""
    da, db = dims
    t = np.asarray(state).reshape(da, db, da, db)
    jd = np.asarray(degrader_choi).reshape(db, dim_out, db, dim_out)
    out = db * np.einsum("abcd,bedf->aecf", t, jd)
    n = da * dim_out
    return out.reshape(n, n)


@dataclass
class DegradationResult:
    residual: float
    degrader_choi: np.ndarray
    frobenius: float
    solution: SdpSolution
    residual_operator: np.ndarray


def polish_degrader(jd, db, dout):
    """Rescale a near-CPTP Choi block so its input marginal is exactly ``1/db``."""
    jd = psd_project(0.5 * (jd + jd.conj().T))
    m = db * partial_trace(jd, (db, dout), 0)
    try:
        t = sqrtm_psd(m, inverse=True)
    except np.linalg.LinAlgError:
        jd = jd + 1e-12 * np.eye(jd.shape[0])
        m = db * partial_trace(jd, (db, dout), 0)
        t = sqrtm_psd(m, inverse=True)
    k = np.kron(t, np.eye(dout))
    jd = k @ jd @ k.conj().T
    return 0.5 * (jd + jd.conj().T)


def local_degradation_sdp(rho, sigma, dims_rho, dims_sigma, cfg: SolverConfig = DEFAULT_CONFIG):
    """Minimize ``||(id (x) D)(rho) - sigma||_F^2`` over channels ``D: B -> B'``.

    Returns the trace-norm residual of the best (polished) degrader.
    """
    da, db = dims_rho
    da2, dout = dims_sigma
    if da != da2:
        raise ValueError("states must share the A factor")
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    n = db * dout
    prob = ConicProblem("min")
    hb = prob.add_block(n)
    prob.add_constraint({hb: lambda x: partial_trace(x, (db, dout), 0)}, np.eye(db, dtype=complex) / db)
    prob.set_quadratic({hb: lambda x: link(rho, x, (da, db), dout)}, sigma)
    sol = solve(prob, cfg)
    jd = sol.blocks[hb] if n > 1 else np.array([[sol.blocks[hb]]], dtype=complex)
    jd = polish_degrader(jd, db, dout)
    resid_op = sigma - link(rho, jd, (da, db), dout)
    return DegradationResult(trace_norm(resid_op), jd, float(np.linalg.norm(resid_op)), sol, resid_op)


def degradability_sdp(n_alpha, n_beta, cfg: SolverConfig = DEFAULT_CONFIG):
    """Best channel ``D`` with ``D o n_alpha ~ n_beta``; returns ``(residual, degrader)``.

    The residual is the trace norm of the Choi-matrix mismatch.
    """
    from .channels import Channel

    res = degradability_detail(n_alpha, n_beta, cfg)
    return res.residual, Channel(n_alpha.dim_out, n_beta.dim_out, res.degrader_choi)


def degradability_detail(n_alpha, n_beta, cfg: SolverConfig = DEFAULT_CONFIG) -> DegradationResult:
    if n_alpha.dim_in != n_beta.dim_in:
        raise ValueError("channels must share the input dimension")
    return local_degradation_sdp(
        n_alpha.choi, n_beta.choi, (n_alpha.dim_in, n_alpha.dim_out), (n_beta.dim_in, n_beta.dim_out), cfg
    )


# ---------------------------------------------------------------------------
# simulating POVM

def simulating_povm_sdp(rho, sigma, p, q, cfg: SolverConfig = DEFAULT_CONFIG):
    """Find a POVM ``{R_y}`` on ``B`` reproducing ``Tr[(P_x (x) Q_y) sigma]`` on ``rho``.

    ``rho`` and ``sigma`` are :class:`~antidegrade.games.BipartiteState`; ``p``
    acts on ``A`` and ``q`` on ``B'``.  Minimizes the largest absolute
    statistic mismatch.  Returns ``(feasible, r, residual)`` with
    ``feasible`` meaning ``residual <= 1e-6``.
    """
    from .games import Povm

    da, db = rho.dims
    da2, dq = sigma.dims
    if da != da2:
        raise ValueError("states must share the A factor")
    ma = partial_trace(rho.matrix, rho.dims, 0)
    mb = partial_trace(sigma.matrix, sigma.dims, 0)
    if np.max(np.abs(ma - mb)) > 1e-8:
        raise ValueError("A-marginals differ")
    if p.dim != da or q.dim != dq:
        raise ValueError("POVM dimensions do not match the states")
    steered_r = [partial_trace(np.kron(px, np.eye(db)) @ rho.matrix, rho.dims, 1) for px in p.elements]
    steered_s = [partial_trace(np.kron(px, np.eye(dq)) @ sigma.matrix, sigma.dims, 1) for px in p.elements]
    target = np.array([[np.real(np.trace(qy @ s)) for qy in q.elements] for s in steered_s])

    prob = ConicProblem("min")
    rb = [prob.add_block(db) for _ in q.elements]
    t = prob.add_block(1)
    prob.add_objective(t, 1.0)
    prob.add_constraint({h: None for h in rb}, np.eye(db, dtype=complex))
    for xi, sr in enumerate(steered_r):
        for yi, h in enumerate(rb):
            for sgn in (1.0, -1.0):
                slack = prob.add_block(1)
                # t - sgn*(Tr[R_y sr] - target) - slack = 0
                prob.add_constraint(
                    {
                        t: None,
                        h: -sgn * svec(0.5 * (sr + sr.conj().T))[None, :],
                        slack: -np.eye(1),
                    },
                    np.array([-sgn * target[xi, yi]]),
                )
    sol = solve(prob, cfg)
    blocks = [sol.blocks[h] if db > 1 else np.array([[sol.blocks[h]]], dtype=complex) for h in rb]
    r = polish_povm(blocks)
    stats = np.array([[np.real(np.trace(ry @ s)) for ry in r] for s in steered_r])
    residual = float(np.max(np.abs(stats - target)))
    return residual <= 1e-6, Povm(db, r), residual
