"""Extension and antidegradability verdicts with certificates or game witnesses.

A verdict is one of

* :class:`Degradable`: a channel ``D`` with ``D o N_alpha ~ N_beta`` (trace-norm
  residual on Choi matrices at most ``1e-6``);
* :class:`NotDegradable`: a guessing game, played with a symmetric public side
  channel, in which the holder of ``N_beta`` beats the holder of ``N_alpha`` by a
  certified margin;
* :class:`Inconclusive`: neither could be established.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .channels import Channel, complementary, from_choi, symmetric_channel, tensor_channels
from .games import (
    BipartiteState,
    Ensemble,
    ObservableFamily,
    Povm,
    bell_povm,
    bell_unitaries,
    complete_povm_from_positive_ops,
    ensemble_from_povm,
    povm_from_observables,
    steering_rank,
    tomography_frame,
)
from .matkernel import embed, partial_trace, permute_systems, svec, trace_norm

EXTENSION_TOL = 1e-6
FAIL_TOL = 1e-4


@dataclass
class DegradabilityCertificate:
    degrader: Channel
    residual: float

    def recompute(self, n_alpha: Channel, n_beta: Channel) -> float:
        out = sdp.link(n_alpha.choi, self.degrader.choi, (n_alpha.dim_in, n_alpha.dim_out), self.degrader.dim_out)
        return trace_norm(out - n_beta.choi)


@dataclass
class GameWitness:
    side_channel: Channel
    ensemble: Ensemble | None
    alice_povm: Povm
    bob_povm: Povm
    eve_povm: Povm
    p_bob: float
    p_eve: float
    p_eve_upper: float
    bob_channel: Channel | None = None
    eve_channel: Channel | None = None
    info: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.p_bob - self.p_eve

    @property
    def certified_gap(self) -> float:
        return self.p_bob - self.p_eve_upper


@dataclass
class Degradable:
    certificate: DegradabilityCertificate
    diagnostics: dict = field(default_factory=dict)
    name = "Degradable"


@dataclass
class NotDegradable:
    witness: GameWitness
    diagnostics: dict = field(default_factory=dict)
    name = "NotDegradable"


@dataclass
class Inconclusive:
    diagnostics: dict = field(default_factory=dict)
    name = "Inconclusive"


@dataclass
class CompletenessReport:
    steering_rank: int
    required: int
    complete: bool
    frame_rank: int


@dataclass(frozen=True)
class WitnessConfig:
    restarts: int = 10
    rounds: int = 200
    delta: float = 1e-3
    n_outcomes: int | None = None
    seed: int = 0
    bundle: int = 6
    stall_rounds: int = 3
    stall_tol: float = 1e-5
    restart_patience: int = 3
    inner: sdp.SolverConfig = sdp.SolverConfig(eps_abs=1e-7, status_tol=1e-6, max_iters=20_000)
    # the measurement step only proposes the next POVM, which the next round re-scores exactly
    step: sdp.SolverConfig = sdp.SolverConfig(eps_abs=1e-6, status_tol=1e-4, max_iters=4_000)
    verify: sdp.SolverConfig = sdp.DEFAULT_CONFIG


# ---------------------------------------------------------------------------
# state helpers

def extend_state(rho, dims, omega, dims_omega):
    """Reorder ``rho_AB (x) omega_{A0 B0}`` into ``(A A0)(B B0)``."""
    m = np.kron(rho, omega)
    da, db = dims
    a0, b0 = dims_omega
    m = permute_systems(m, (da, db, a0, b0), (0, 2, 1, 3))
    return m, (da * a0, db * b0)


def steer_b(matrix, dims, op) -> np.ndarray:
    """``Tr_B[(1 (x) op) rho_AB]``, an operator on ``A``."""
    da, db = dims
    t = np.asarray(matrix).reshape(da, db, da, db)
    return np.einsum("db,abcd->ac", op, t)


def steer_a(matrix, dims, op) -> np.ndarray:
    da, db = dims
    t = np.asarray(matrix).reshape(da, db, da, db)
    return np.einsum("ca,abcd->bd", op, t)


def _random_povm(d, n, rng):
    g = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    els = [x @ x.conj().T for x in g]
    return sdp.polish_povm(els)


def _basis_povm(da, a0, n):
    els = [np.zeros((da * a0, da * a0), dtype=complex) for _ in range(n)]
    for i in range(da):
        p = np.zeros((da, da), dtype=complex)
        p[i, i] = 1.0
        els[i % n] += np.kron(p, np.eye(a0))
    return els


def _superop_pinv(c: Channel) -> np.ndarray:
    """Pseudo-inverse of the (complex-linear) superoperator of ``c`` on row-major vectorizations."""
    n = c.dim_in
    cols = []
    for k in range(n):
        for l in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[k, l] = 1.0
            cols.append(c(e).reshape(-1))
    m = np.array(cols).T
    return np.linalg.pinv(m, rcond=1e-10)


def witness_observables(residual_op, dims, side: Channel):
    """Observables on ``A A0`` turning a residual operator ``W`` into a decoder game.

    With the teleportation decoders, ``sum_z Tr[(O_z (x) R_z) tau_N]`` equals
    ``Tr[W (id (x) D_R)(choi N)]`` where ``tau_N`` is the Choi state of
    ``N (x) side`` and ``D_R`` the channel teleported through ``R``.
    """
    da, d = dims
    n0 = side.dim_in
    spinv = _superop_pinv(side)
    obs = []
    for u in bell_unitaries(d):
        k = np.kron(np.eye(da), u)
        wz = (k.conj().T @ residual_op @ k).reshape(da, d, da, d)
        o = np.zeros((da * n0, da * n0), dtype=complex)
        for i in range(da):
            for j in range(da):
                g = wz[i, :, j, :]
                y = (spinv @ g.T.reshape(-1)).reshape(n0, n0)
                o[i * n0 : (i + 1) * n0, j * n0 : (j + 1) * n0] = n0 * y.T / d
        obs.append(0.5 * (o + o.conj().T))
    return obs


# ---------------------------------------------------------------------------
# see-saw

@dataclass
class _SearchState:
    gap: float = -np.inf
    povm: list | None = None
    restart: int = -1
    history: list = field(default_factory=list)


def _p_step(bob_ops, cuts, n, dim, cfg, warm=None):
    prob = sdp.ConicProblem("max")
    hs = [prob.add_block(dim) for _ in range(n)]
    t = prob.add_block(1, sdp.FREE)
    for h, b in zip(hs, bob_ops):
        prob.add_objective(h, b)
    prob.add_objective(t, -1.0)
    prob.add_constraint({h: None for h in hs}, np.eye(dim, dtype=complex))
    for cut in cuts:
        s = prob.add_block(1)
        terms = {t: np.eye(1), s: -np.eye(1)}
        for h, e in zip(hs, cut):
            terms[h] = -svec(0.5 * (e + e.conj().T))[None, :]
        prob.add_constraint(terms, np.zeros(1))
    sol = sdp.solve(prob, cfg, warm)
    return sdp.polish_povm([sol.blocks[h] for h in hs]), sol


def seesaw(eve_state, eve_dims, bob_state, bob_dims, n_outcomes, seeds, cfg: WitnessConfig):
    """Alternate Bob/Eve decoders and Alice's measurement to widen the guessing gap.

    ``seeds`` is a list of initial measurements on the shared ``A`` factor.
    Restarts stop early once ``cfg.restart_patience`` consecutive seeds fail to
    improve the best gap.  Returns the best measurement found with its
    estimated certified gap.
    """
    dim = bob_dims[0]
    best = _SearchState()
    idle = 0
    for r, p in enumerate(seeds):
        before = best.gap
        cuts = []
        gaps = []
        warm = {"bob": None, "eve": None, "p": None}
        for rnd in range(cfg.rounds):
            bob_ops = [steer_a(bob_state, bob_dims, e) for e in p]
            eve_ops = [steer_a(eve_state, eve_dims, e) for e in p]
            db = sdp.discriminate(bob_ops, cfg.inner, warm["bob"])
            de = sdp.discriminate(eve_ops, cfg.inner, warm["eve"])
            warm["bob"] = db.solution.state
            warm["eve"] = de.solution.state
            gap = db.value - de.upper
            gaps.append(gap)
            if gap > best.gap:
                best.gap, best.povm, best.restart = gap, [e.copy() for e in p], r
            if len(gaps) > cfg.stall_rounds and gaps[-1] - max(gaps[: -cfg.stall_rounds]) < cfg.stall_tol:
                break
            cuts.append([steer_b(eve_state, eve_dims, q) for q in de.povm])
            cuts = cuts[-cfg.bundle :]
            bob_a = [steer_b(bob_state, bob_dims, q) for q in db.povm]
            # pad to a fixed number of cuts so consecutive solves share a layout and can warm start
            padded = cuts + [cuts[0]] * (cfg.bundle - len(cuts))
            p, sol = _p_step(bob_a, padded, n_outcomes, dim, cfg.step, warm["p"])
            warm["p"] = sol.state
        best.history.append({"restart": r, "rounds": len(gaps), "gap": max(gaps)})
        idle = idle + 1 if best.gap - before < cfg.stall_tol else 0
        if cfg.restart_patience and idle >= cfg.restart_patience:
            break
    return best


def witness_search_states(rho, dims_rho, sigma, dims_sigma, cfg: WitnessConfig = WitnessConfig(), degradation=None):
    """See-saw search on the state pair extended by the canonical symmetric side channel.

    Bob holds ``sigma`` (the target), Eve holds ``rho``.  Returns a dict with the
    best Alice POVM on ``A A0``, the extended states and search statistics.
    """
    d = dims_sigma[1]
    side = symmetric_channel(max(d, 2))
    n0 = side.dim_in
    omega = side.choi
    bob_state, bob_dims = extend_state(sigma, dims_sigma, omega, (n0, side.dim_out))
    eve_state, eve_dims = extend_state(rho, dims_rho, omega, (n0, side.dim_out))
    n = cfg.n_outcomes or (dims_sigma[1] * side.dim_out)
    da = dims_rho[0]
    rng = np.random.default_rng(cfg.seed)
    seeds = []
    if n == side.dim_out * dims_sigma[1] and d >= 2:
        if degradation is None:
            degradation = sdp.local_degradation_sdp(rho, sigma, dims_rho, dims_sigma, cfg.verify)
        obs = witness_observables(degradation.residual_operator, dims_sigma, side)
        seeds.append(list(povm_from_observables(ObservableFamily(da * n0, obs))[0].elements))
    seeds.append(_basis_povm(da, n0, n))
    while len(seeds) < cfg.restarts:
        seeds.append(_random_povm(da * n0, n, rng))
    seeds = seeds[: max(cfg.restarts, 1)]
    best = seesaw(eve_state, eve_dims, bob_state, bob_dims, n, seeds, cfg)
    return {
        "side": side,
        "povm": best.povm,
        "estimate": best.gap,
        "restart": best.restart,
        "history": best.history,
        "bob": (bob_state, bob_dims),
        "eve": (eve_state, eve_dims),
    }


def witness_search(n_alpha: Channel, n_beta: Channel, cfg: WitnessConfig = WitnessConfig(), degradation=None):
    """Look for a game where ``n_beta``'s receiver beats ``n_alpha``'s by more than ``cfg.delta``.

    Returns a verified :class:`GameWitness` or ``None``.
    """
    if n_alpha.dim_in != n_beta.dim_in:
        raise ValueError("channels must share the input dimension")
    found = witness_search_states(
        n_alpha.choi, (n_alpha.dim_in, n_alpha.dim_out), n_beta.choi, (n_beta.dim_in, n_beta.dim_out), cfg, degradation
    )
    if found["povm"] is None:
        return None
    side = found["side"]
    bob_ch = tensor_channels(n_beta, side)
    eve_ch = tensor_channels(n_alpha, side)
    alice = Povm(bob_ch.dim_in, found["povm"])
    ens = ensemble_from_povm(alice, bob_ch)
    pb, qb, _ = sdp.guessing_probability(bob_ch, ens, cfg.verify)
    bob_ops = [p * bob_ch(r) for p, r in ens.items]
    eve_ops = [p * eve_ch(r) for p, r in ens.items]
    db = sdp.discriminate(bob_ops, cfg.verify)
    de = sdp.discriminate(eve_ops, cfg.verify)
    info = {
        "estimate": found["estimate"],
        "best_restart": found["restart"],
        "history": found["history"],
        "bob_dual_gap": db.gap,
        "eve_dual_gap": de.gap,
    }
    w = GameWitness(
        side_channel=side,
        ensemble=ens,
        alice_povm=alice,
        bob_povm=Povm(bob_ch.dim_out, db.povm),
        eve_povm=Povm(eve_ch.dim_out, de.povm),
        p_bob=db.value,
        p_eve=de.value,
        p_eve_upper=de.upper,
        bob_channel=n_beta,
        eve_channel=n_alpha,
        info=info,
    )
    if w.certified_gap > cfg.delta:
        return w
    return None


def verify_witness(w: GameWitness, cfg: sdp.SolverConfig = sdp.DEFAULT_CONFIG, tol: float = 1e-7) -> dict:
    """Recompute both guessing probabilities and check the stored decoders achieve them."""
    bob_ch = tensor_channels(w.bob_channel, w.side_channel)
    eve_ch = tensor_channels(w.eve_channel, w.side_channel)
    pb, _, yb = sdp.guessing_probability(bob_ch, w.ensemble, cfg)
    pe, _, ye = sdp.guessing_probability(eve_ch, w.ensemble, cfg)
    achieved_b = sum(p * np.real(np.trace(q @ bob_ch(r))) for (p, r), q in zip(w.ensemble.items, w.bob_povm.elements))
    achieved_e = sum(p * np.real(np.trace(q @ eve_ch(r))) for (p, r), q in zip(w.ensemble.items, w.eve_povm.elements))
    ub = float(np.real(np.trace(yb)))
    ue = float(np.real(np.trace(ye)))
    ok = (
        abs(pb - w.p_bob) <= tol
        and abs(pe - w.p_eve) <= tol
        and achieved_b >= w.p_bob - tol
        and achieved_e >= w.p_eve - tol
        and pb - ue > 0
    )
    return {"p_bob": pb, "p_eve": pe, "bob_upper": ub, "eve_upper": ue, "achieved_bob": achieved_b,
            "achieved_eve": achieved_e, "certified_gap": pb - ue, "ok": bool(ok)}


# ---------------------------------------------------------------------------
# verdicts

def _degradation_diag(res):
    return {
        "residual": res.residual,
        "frobenius": res.frobenius,
        "solver_status": res.solution.status,
        "solver_iterations": res.solution.iterations,
    }


def is_extension(n_alpha: Channel, n_beta: Channel, cfg: WitnessConfig = WitnessConfig()):
    """Is ``n_beta = D o n_alpha`` for some channel ``D``?"""
    if n_alpha.dim_in != n_beta.dim_in:
        raise ValueError("channels must share the input dimension")
    res = sdp.degradability_detail(n_alpha, n_beta, cfg.verify)
    diag = _degradation_diag(res)
    if res.residual <= EXTENSION_TOL:
        cert = DegradabilityCertificate(Channel(n_alpha.dim_out, n_beta.dim_out, res.degrader_choi), res.residual)
        return Degradable(cert, diag)
    w = witness_search(n_alpha, n_beta, cfg, res)
    if w is not None:
        diag["witness_search"] = w.info
        return NotDegradable(w, diag)
    diag["witness_search"] = "no witness with certified gap above delta"
    return Inconclusive(diag)


def is_antidegradable(n: Channel, cfg: WitnessConfig = WitnessConfig()):
    """Can the channel output be recovered from its environment by a channel ``D``?"""
    return is_extension(complementary(n), n, cfg)


def local_degradable(rho: BipartiteState, sigma: BipartiteState, cfg: WitnessConfig = WitnessConfig()):
    """Can ``sigma_AB'`` be obtained from ``rho_AB`` by a channel on ``B`` alone?"""
    ma, mb = rho.marginal(0), sigma.marginal(0)
    if np.max(np.abs(ma - mb)) > 1e-8:
        raise ValueError("A-marginals differ")
    da = rho.dims[0]
    if np.max(np.abs(ma - np.eye(da) / da)) <= 1e-8:
        return is_extension(from_choi(rho.matrix, da, rho.dims[1]), from_choi(sigma.matrix, da, sigma.dims[1]), cfg)
    res = sdp.local_degradation_sdp(rho.matrix, sigma.matrix, rho.dims, sigma.dims, cfg.verify)
    diag = _degradation_diag(res)
    if res.residual <= EXTENSION_TOL:
        cert = DegradabilityCertificate(Channel(rho.dims[1], sigma.dims[1], res.degrader_choi), res.residual)
        return Degradable(cert, diag)
    found = witness_search_states(rho.matrix, rho.dims, sigma.matrix, sigma.dims, cfg, res)
    if found["povm"] is not None:
        alice = Povm(found["bob"][1][0], found["povm"])
        bs, bd = found["bob"]
        es, ed = found["eve"]
        db = sdp.discriminate([steer_a(bs, bd, e) for e in alice.elements], cfg.verify)
        de = sdp.discriminate([steer_a(es, ed, e) for e in alice.elements], cfg.verify)
        if db.value - de.upper > cfg.delta:
            w = GameWitness(found["side"], None, alice, Povm(bd[1], db.povm), Povm(ed[1], de.povm),
                            db.value, de.value, de.upper, info={"history": found["history"]})
            return NotDegradable(w, diag)
    return Inconclusive(diag)


def is_complete_state(rho: BipartiteState) -> CompletenessReport:
    da, db = rho.dims
    rank = steering_rank(rho)
    frame = complete_povm_from_positive_ops(tomography_frame(da)) if da > 1 else None
    frame_rank = steering_rank(rho, frame.elements) if frame is not None else steering_rank(rho, [np.eye(1)])
    return CompletenessReport(rank, db * db, rank == db * db, frame_rank)


# ---------------------------------------------------------------------------
# teleportation degrader

def degrader_from_simulating_povm(rho: BipartiteState, sigma: BipartiteState, r_family: Povm, tol: float = 1e-4) -> Channel:
    """Channel ``B -> B'`` teleporting through a POVM that simulates a Bell measurement.

    ``D(X) = sum_z U_z Tr_{B B0}[(R_z (x) 1_{B1})(X (x) Phi+_{B1 B0})] U_z^dag`` with
    ``U_z`` the Weyl corrections in :func:`bell_povm` order.  Warns when
    ``(id (x) D)(rho)`` misses ``sigma`` by more than ``tol`` in trace norm.
    """
    db = rho.dims[1]
    d = sigma.dims[1]
    if r_family.dim != db * d or len(r_family) != d * d:
        raise ValueError("R family must have d^2 outcomes acting on B (x) B0")
    phi = np.zeros(d * d, dtype=complex)
    phi[:: d + 1] = 1 / np.sqrt(d)
    phi = np.outer(phi, phi.conj())
    dims = (db, d, d)  # B, B1, B0
    lifted = [embed(r, dims, [0, 2]) for r in r_family.elements]
    us = bell_unitaries(d)
    choi = np.zeros((db * d, db * d), dtype=complex)
    for a in range(db):
        for b in range(db):
            x = np.zeros((db, db), dtype=complex)
            x[a, b] = 1.0
            t = np.kron(x, phi)
            out = np.zeros((d, d), dtype=complex)
            for u, r in zip(us, lifted):
                m = partial_trace(r @ t, dims, [1])
                out += u @ m @ u.conj().T
            choi[a * d : (a + 1) * d, b * d : (b + 1) * d] = out / db
    choi = 0.5 * (choi + choi.conj().T)
    ch = Channel(db, d, choi)
    err = trace_norm(sdp.link(rho.matrix, choi, rho.dims, d) - sigma.matrix)
    if err > tol:
        warnings.warn(f"R family does not simulate the Bell statistics: degradation error {err:.3e}")
    return ch


def teleportation_degrader(rho: BipartiteState, sigma: BipartiteState, cfg: sdp.SolverConfig = sdp.DEFAULT_CONFIG):
    """Degrader obtained by simulating a Bell measurement on ``sigma (x) Phi+``.

    Alice measures an informationally complete POVM on ``A A0``; the simulating
    POVM on ``B B0`` comes from :func:`antidegrade.sdp.simulating_povm_sdp`.
    Returns ``(degrader, simulation_residual)``.
    """
    from .games import ic_povm

    d = sigma.dims[1]
    omega = np.zeros(d * d, dtype=complex)
    omega[:: d + 1] = 1 / np.sqrt(d)
    omega = np.outer(omega, omega.conj())
    rx, rdims = extend_state(rho.matrix, rho.dims, omega, (d, d))
    sx, sdims = extend_state(sigma.matrix, sigma.dims, omega, (d, d))
    pa = ic_povm(rho.dims[0])
    p0 = ic_povm(d)
    p = Povm(rdims[0], [np.kron(x, y) for x in pa.elements for y in p0.elements])
    _, r, resid = sdp.simulating_povm_sdp(BipartiteState(rdims, rx), BipartiteState(sdims, sx), p, bell_povm(d), cfg)
    return degrader_from_simulating_povm(rho, sigma, r), resid


# ---------------------------------------------------------------------------
# consistency harness

@dataclass
class HarnessReport:
    residual: float
    verdict: str
    witness_gap: float | None
    certified_gap: float | None
    gap_bound: float
    inconsistencies: list

    @property
    def consistent(self) -> bool:
        return not self.inconsistencies


def consistency_harness(n_alpha: Channel, n_beta: Channel, cfg: WitnessConfig = WitnessConfig()) -> HarnessReport:
    """Cross-check the degradability residual against an independent witness search.

    Any game gap is bounded by half the trace-norm residual, since Eve can
    apply the best degrader and then Bob's decoder.
    """
    res = sdp.degradability_detail(n_alpha, n_beta, cfg.verify)
    w = witness_search(n_alpha, n_beta, cfg, res)
    if res.residual <= EXTENSION_TOL:
        verdict = "Degradable"
    else:
        verdict = "NotDegradable" if w is not None else "Inconclusive"
    issues = []
    bound = 0.5 * res.residual
    if w is not None:
        if res.residual <= EXTENSION_TOL:
            issues.append("verified witness with residual below the extension threshold")
        if verdict == "Degradable":
            issues.append("Degradable verdict coexists with a verified witness")
        if w.certified_gap > bound + 1e-6:
            issues.append(f"certified gap {w.certified_gap:.3e} exceeds residual bound {bound:.3e}")
    return HarnessReport(
        residual=res.residual,
        verdict=verdict,
        witness_gap=None if w is None else w.gap,
        certified_gap=None if w is None else w.certified_gap,
        gap_bound=bound,
        inconsistencies=issues,
    )
