import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antidegrade import _admm_py, _kernel, sdp
from antidegrade import channels as ch
from antidegrade import games as gm
from antidegrade import matkernel as mk

BACKENDS = ["python"] + (["cython"] if _kernel.BACKEND == "cython" else [])


def test_helstrom_instance():
    e = gm.Ensemble(2, [(0.5, np.diag([1.0, 0])), (0.5, np.full((2, 2), 0.5))])
    p, povm, y = sdp.guessing_probability(ch.identity_channel(2), e)
    assert p == pytest.approx(0.5 + np.sqrt(2) / 4, abs=1e-8)
    assert np.real(np.trace(y)) >= p - 1e-12
    assert len(povm) == 2


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_discrimination_matches_helstrom(seed):
    rng = np.random.default_rng(seed)
    p0 = rng.uniform(0.05, 0.95)
    r0, r1 = mk.random_density(2, rng), mk.random_density(2, rng)
    res = sdp.discriminate([p0 * r0, (1 - p0) * r1])
    assert res.value == pytest.approx(gm.helstrom(p0, r0, 1 - p0, r1), abs=1e-7)
    # the shifted dual certifies an upper bound
    for o in (p0 * r0, (1 - p0) * r1):
        assert np.linalg.eigvalsh(res.dual - o)[0] >= -1e-12
    assert res.upper >= res.value - 1e-12


def test_discrimination_povm_is_valid(rng):
    ops = [0.25 * mk.random_density(3, rng) for _ in range(4)]
    res = sdp.discriminate(ops)
    gm.Povm(3, res.povm)
    assert res.gap < 1e-6


def test_psd_projection_problem(rng):
    # min ||X - H||^2 over PSD X has the eigenvalue clamp as solution
    h = mk.random_hermitian(4, rng)
    prob = sdp.ConicProblem("min")
    b = prob.add_block(4)
    prob.set_quadratic({b: None}, h)
    sol = sdp.solve(prob)
    assert sol.optimal
    np.testing.assert_allclose(sol.blocks[b], mk.psd_project(h), atol=1e-7)


def test_infeasible_hint():
    prob = sdp.ConicProblem("min")
    b = prob.add_block(2)
    prob.add_constraint({b: lambda x: np.trace(x)}, 1.0)
    prob.add_constraint({b: lambda x: np.trace(x)}, 2.0)
    assert sdp.solve(prob).status == "infeasible_hint"


def test_free_block_and_scalar_constraint():
    # min t s.t. t - s = 3, s >= 0  ->  t = 3
    prob = sdp.ConicProblem("min")
    t = prob.add_block(1, sdp.FREE)
    s = prob.add_block(1)
    prob.add_objective(t, 1.0)
    prob.add_constraint({t: np.eye(1), s: -np.eye(1)}, np.array([3.0]))
    sol = sdp.solve(prob)
    assert sol.blocks[t] == pytest.approx(3.0, abs=1e-7)


def test_warm_start_reuses_state(rng):
    ops = [0.5 * mk.random_density(3, rng) for _ in range(2)]
    first = sdp.discriminate(ops)
    again = sdp.discriminate(ops, warm=first.solution.state)
    assert again.solution.iterations <= first.solution.iterations
    assert again.value == pytest.approx(first.value, abs=1e-8)


@pytest.mark.parametrize("backend", BACKENDS)
def test_backends_agree_on_solution(backend, rng):
    ops = [0.5 * mk.random_density(3, rng) for _ in range(2)]
    cfg = sdp.SolverConfig(backend=backend)
    ref = sdp.discriminate(ops, sdp.SolverConfig(backend="python"))
    res = sdp.discriminate(ops, cfg)
    assert res.value == pytest.approx(ref.value, abs=1e-9)


@pytest.mark.skipif(_kernel.BACKEND != "cython", reason="compiled kernel not built")
def test_compiled_chunk_matches_python(rng):
    kc = _kernel.get("cython")
    offsets = np.array([0, 9, 13], dtype=np.int64)
    sizes = np.array([3, 2, 1], dtype=np.int64)
    kinds = np.array([0, 0, 1], dtype=np.int64)
    n, r = 14, 5
    U = rng.normal(size=(n, r))
    V = rng.normal(size=(n, r)) / n
    h = rng.normal(size=n)
    start = [rng.normal(size=n) for _ in range(3)]
    outs = []
    for k in (_admm_py, kc):
        x, z, u = (s.copy() for s in start)
        res = k.run_chunk(x, z, u, 0.3, U, V, h, offsets, sizes, kinds, 1.5, 7)
        outs.append((x, z, u, res))
    for a, b in zip(outs[0][:3], outs[1][:3]):
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(outs[0][3], outs[1][3], rtol=1e-10, atol=1e-12)
    w = rng.normal(size=n)
    w1, w2 = w.copy(), w.copy()
    _admm_py.project_cone(w1, offsets, sizes, kinds)
    kc.project_cone(w2, offsets, sizes, kinds)
    np.testing.assert_allclose(w1, w2, atol=1e-12)


def test_degradability_of_erasure_pair():
    res, d = sdp.degradability_sdp(ch.erasure(0.4), ch.erasure(0.6))
    assert res <= 1e-6
    np.testing.assert_allclose(d.choi, ch.further_erasure(1 / 3).choi, atol=1e-5)


def test_degradability_gap_for_impossible_pair():
    res, _ = sdp.degradability_sdp(ch.constant_channel(2), ch.identity_channel(2))
    assert res == pytest.approx(1.5, abs=1e-4)


def test_link_matches_compose(rng):
    a = ch.random_channel(2, 3, rng)
    d = ch.random_channel(3, 2, rng)
    out = sdp.link(a.choi, d.choi, (2, 3), 2)
    np.testing.assert_allclose(out, ch.compose(d, a).choi, atol=1e-12)


def test_polish_degrader_is_trace_preserving(rng):
    j = ch.random_channel(2, 2, rng).choi + 1e-4 * mk.random_density(4, rng)
    p = sdp.polish_degrader(j, 2, 2)
    ch.Channel(2, 2, p / np.trace(p).real)
    np.testing.assert_allclose(2 * mk.partial_trace(p, (2, 2), 0), np.eye(2), atol=1e-10)


def test_simulating_povm_identity():
    phi = gm.max_entangled(2)
    feasible, r, resid = sdp.simulating_povm_sdp(phi, phi, gm.ic_povm(2), gm.ic_povm(2))
    assert feasible and resid <= 1e-6
    assert len(r) == len(gm.ic_povm(2))


def test_simulating_povm_infeasible():
    # a constant channel cannot reproduce the statistics of the identity
    rho = gm.BipartiteState((2, 2), ch.constant_channel(2).choi)
    sigma = gm.max_entangled(2)
    feasible, _, resid = sdp.simulating_povm_sdp(rho, sigma, gm.ic_povm(2), gm.ic_povm(2))
    assert not feasible and resid > 1e-3


def test_env_var_selects_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, ANTIDEGRADE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import antidegrade; print(antidegrade.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
