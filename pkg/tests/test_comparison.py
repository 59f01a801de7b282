import warnings
from dataclasses import replace

import numpy as np
import pytest

from antidegrade import channels as ch
from antidegrade import comparison as cm
from antidegrade import games as gm
from antidegrade import matkernel as mk
from antidegrade import sdp

FAST = replace(cm.WitnessConfig(), restarts=3, rounds=20)


def _pure_input(rng, d=2):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return mk.proj(v / np.linalg.norm(v))


def test_channel_extends_itself(rng):
    n = ch.random_channel(2, 2, rng, n_kraus=2)
    v = cm.is_extension(n, n)
    assert v.name == "Degradable"
    for _ in range(5):
        r = mk.random_density(2, rng)
        assert mk.trace_norm(v.certificate.degrader(n(r)) - n(r)) <= 1e-6
    assert cm.witness_search(n, n, FAST) is None


def test_certificate_recomputes(rng):
    a = ch.erasure(0.4)
    b = ch.erasure(0.6)
    v = cm.is_extension(a, b)
    assert v.name == "Degradable"
    assert abs(v.certificate.recompute(a, b) - v.certificate.residual) <= 1e-9


def test_constant_versus_identity_witness():
    v = cm.is_extension(ch.constant_channel(2), ch.identity_channel(2), FAST)
    assert v.name == "NotDegradable"
    w = v.witness
    assert w.certified_gap >= 0.2
    check = cm.verify_witness(w)
    assert check["ok"]
    assert abs(check["p_bob"] - w.p_bob) <= 1e-7 and abs(check["p_eve"] - w.p_eve) <= 1e-7


def test_erasure_below_half_has_witness():
    v = cm.is_antidegradable(ch.erasure(0.4), FAST)
    assert v.name == "NotDegradable"
    assert v.witness.certified_gap > 0.05
    assert cm.verify_witness(v.witness)["ok"]


def test_amplitude_damping_above_half_is_antidegradable():
    v = cm.is_antidegradable(ch.amplitude_damping(0.7))
    assert v.name == "Degradable" and v.certificate.residual <= 1e-6


def test_symmetric_channel_is_antidegradable_both_ways():
    s = ch.symmetric_channel(2)
    e = ch.complementary(s)
    for a, b in ((e, s), (s, e)):
        rep = cm.consistency_harness(a, b, FAST)
        assert rep.verdict == "Degradable" and rep.consistent and rep.certified_gap is None


def test_harness_flagged_mixture(rng):
    cs = [ch.amplitude_damping(0.2), ch.amplitude_damping(0.4)]
    rep = cm.consistency_harness(ch.flagged_mixture(cs, [0.5, 0.5]), ch.mixture(cs, [0.5, 0.5]), FAST)
    assert rep.verdict == "Degradable" and rep.consistent


def test_harness_gap_respects_residual_bound():
    rep = cm.consistency_harness(ch.complementary(ch.erasure(0.3)), ch.erasure(0.3), FAST)
    assert rep.verdict == "NotDegradable"
    assert rep.consistent
    assert rep.certified_gap <= rep.gap_bound + 1e-6


def test_one_sidedness_on_degradable_pairs(rng):
    for _ in range(4):
        n = ch.random_channel(2, 2, rng, n_kraus=2)
        d = ch.random_channel(2, 2, rng)
        b = ch.compose(d, n)
        res = sdp.degradability_detail(n, b)
        assert res.residual <= 1e-6
        assert cm.is_extension(n, b).name == "Degradable"


def test_monotone_under_post_processing(rng):
    a, b = ch.erasure(0.2), ch.erasure(0.5)
    assert cm.is_extension(a, b).name == "Degradable"
    c = ch.random_channel(3, 2, rng)
    assert cm.is_extension(a, ch.compose(c, b)).name == "Degradable"


def test_state_and_channel_residuals_agree(rng):
    for _ in range(5):
        a = ch.random_channel(2, 2, rng, n_kraus=2)
        b = ch.random_channel(2, 2, rng, n_kraus=2)
        chan = sdp.degradability_detail(a, b).residual
        state = sdp.local_degradation_sdp(a.choi, b.choi, (2, 2), (2, 2)).residual
        assert chan == pytest.approx(state, abs=1e-6)


def test_local_degradable_examples(rng):
    phi = gm.max_entangled(2)
    assert cm.local_degradable(phi, phi).name == "Degradable"
    tau = mk.random_density(2, rng)
    prod = gm.BipartiteState((2, 2), np.kron(np.eye(2) / 2, tau))
    v = cm.local_degradable(phi, prod)
    assert v.name == "Degradable"
    np.testing.assert_allclose(v.certificate.degrader(np.diag([1.0, 0])), tau, atol=1e-6)
    v = cm.local_degradable(prod, phi, FAST)
    assert v.name == "NotDegradable"
    assert v.diagnostics["residual"] >= 0.4


def test_local_degradable_general_marginal(rng):
    # non-uniform A marginal takes the state-level route
    psi = np.array([np.sqrt(0.8), 0, 0, np.sqrt(0.2)])
    rho = gm.BipartiteState((2, 2), np.outer(psi, psi))
    deph = ch.from_kraus([np.diag([1.0, 0]), np.diag([0, 1.0])])
    sigma = gm.BipartiteState((2, 2), ch.apply_local(deph, rho.matrix, (2, 2), 1))
    v = cm.local_degradable(rho, sigma)
    assert v.name == "Degradable"
    v = cm.local_degradable(sigma, rho, FAST)
    assert v.name == "NotDegradable"
    assert v.witness.ensemble is None and v.witness.certified_gap > FAST.delta
    with pytest.raises(ValueError):
        cm.local_degradable(rho, gm.max_entangled(2))


def test_completeness_report():
    r = cm.is_complete_state(gm.max_entangled(2))
    assert (r.steering_rank, r.required, r.complete) == (4, 4, True)


def test_extend_state_ordering(rng):
    r = mk.random_density(4, rng)
    w = mk.random_density(4, rng)
    m, dims = cm.extend_state(r, (2, 2), w, (2, 2))
    assert dims == (4, 4)
    np.testing.assert_allclose(mk.partial_trace(m, (2, 2, 2, 2), [0, 2]), r, atol=1e-12)
    np.testing.assert_allclose(mk.partial_trace(m, (2, 2, 2, 2), [1, 3]), w, atol=1e-12)


def test_witness_observables_identity(rng):
    # sum_z Tr[(O_z (x) R_z) tau_N] equals Tr[W (id (x) D_R)(choi N)]
    n = ch.random_channel(2, 2, rng)
    side = ch.symmetric_channel(2)
    w = mk.random_hermitian(4, rng)
    obs = cm.witness_observables(w, (2, 2), side)
    tau, dims = cm.extend_state(n.choi, (2, 2), side.choi, (3, 2))
    bell = gm.bell_povm(2)
    lhs = sum(np.real(np.trace(np.kron(o, r) @ tau)) for o, r in zip(obs, bell.elements))
    phi = gm.max_entangled(2)
    ident = cm.degrader_from_simulating_povm(phi, phi, bell)
    rhs = np.real(np.trace(w @ sdp.link(n.choi, ident.choi, (2, 2), 2)))
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_teleportation_perturbation_is_bounded(rng):
    phi = gm.max_entangled(2)
    bell = gm.bell_povm(2)
    for eps in (1e-3, 1e-2):
        noisy = gm.Povm(4, [(1 - eps) * e + eps * np.eye(4) / 4 for e in bell.elements])
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            d = cm.degrader_from_simulating_povm(phi, phi, noisy)
        err = mk.trace_norm(sdp.link(phi.matrix, d.choi, (2, 2), 2) - phi.matrix)
        assert err <= 10 * eps
        assert caught and "does not simulate" in str(caught[0].message)


def test_degrader_rejects_bad_family():
    phi = gm.max_entangled(2)
    with pytest.raises(ValueError):
        cm.degrader_from_simulating_povm(phi, phi, gm.ic_povm(4))


def test_seesaw_is_deterministic():
    cfg = replace(cm.WitnessConfig(), restarts=3, rounds=4)
    n = ch.amplitude_damping(0.3)
    runs = [cm.witness_search(ch.complementary(n), n, cfg) for _ in range(2)]
    assert runs[0].p_bob == runs[1].p_bob and runs[0].p_eve_upper == runs[1].p_eve_upper
    for a, b in zip(runs[0].alice_povm.elements, runs[1].alice_povm.elements):
        np.testing.assert_array_equal(a, b)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        cm.is_extension(ch.identity_channel(2), ch.identity_channel(3))
