import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antidegrade import channels as ch
from antidegrade import games as gm
from antidegrade import matkernel as mk


def _random_family(rng, d, n, scale=1.0):
    return gm.ObservableFamily(d, [scale * mk.random_hermitian(d, rng) for _ in range(n)])


def test_ensemble_validation():
    with pytest.raises(ValueError):
        gm.Ensemble(2, [(0.5, np.eye(2) / 2), (0.6, np.eye(2) / 2)])
    with pytest.raises(ValueError):
        gm.Ensemble(2, [(1.0, np.diag([1.5, -0.5]))])
    e = gm.Ensemble(2, [(0.25, np.diag([1.0, 0])), (0.75, np.diag([0, 1.0]))])
    np.testing.assert_allclose(e.average(), np.diag([0.25, 0.75]))


def test_povm_validation():
    with pytest.raises(ValueError):
        gm.Povm(2, [np.eye(2) * 0.5])
    with pytest.raises(ValueError):
        gm.Povm(2, [np.diag([1.2, 1.0]), np.diag([-0.2, 0.0])])


def test_steering_matches_channel_action(rng):
    c = ch.random_channel(2, 3, rng)
    state = gm.BipartiteState((2, 3), c.choi)
    p = mk.random_density(2, rng)
    np.testing.assert_allclose(gm.steer(state, p), c(p.T) / 2, atol=1e-12)


def test_bell_povm_is_complete_measurement():
    for d in (2, 3):
        b = gm.bell_povm(d)
        assert len(b) == d * d
        for e in b.elements:
            assert np.real(np.trace(e)) == pytest.approx(1.0)
        # perfectly distinguishes the Bell states it is built from
        phi = gm.max_entangled(d).matrix
        for z, u in enumerate(gm.bell_unitaries(d)):
            k = np.kron(u, np.eye(d))
            s = k @ phi @ k.conj().T
            assert np.real(np.trace(b.elements[z] @ s)) == pytest.approx(1.0, abs=1e-12)


def test_weyl_commutation():
    d = 3
    x = gm.weyl(d, 1, 0)
    z = gm.weyl(d, 0, 1)
    w = np.exp(2j * np.pi / d)
    np.testing.assert_allclose(z @ x, w * x @ z, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_observable_povm_roundtrip(d, n, seed):
    rng = np.random.default_rng(seed)
    obs = _random_family(rng, d, n, scale=rng.uniform(0.1, 10))
    p, lam, sigma = gm.povm_from_observables(obs)
    back = gm.observables_from_povm(p, lam, sigma)
    for a, b in zip(obs.elements, back.elements):
        assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, lam)


def test_utility_observables():
    p = gm.Povm(2, [np.diag([1.0, 0]), np.diag([0, 1.0])])
    obs = gm.observables_from_utility(p, gm.Utility(np.eye(2)))
    for a, b in zip(obs.elements, p.elements):
        np.testing.assert_allclose(a, b)


def test_helstrom_known_value():
    plus = np.full((2, 2), 0.5)
    assert gm.helstrom(0.5, np.diag([1.0, 0]), 0.5, plus) == pytest.approx(0.5 + np.sqrt(2) / 4, abs=1e-14)


def test_ic_povm_spans_operator_space():
    for d in (1, 2, 3):
        p = gm.ic_povm(d)
        vecs = np.array([e.reshape(-1) for e in p.elements])
        assert mk.matrix_rank(vecs) == d * d


def test_ensemble_povm_correspondence(rng):
    p = gm.ic_povm(2)
    e = gm.ensemble_from_povm(p, 2)
    np.testing.assert_allclose(e.average(), np.eye(2) / 2, atol=1e-12)
    back = gm.povm_from_ensemble(e)
    kept = [x for x in p.elements if np.real(np.trace(x)) > 1e-14]
    for a, b in zip(kept, back.elements):
        np.testing.assert_allclose(a, b, atol=1e-12)
    with pytest.raises(ValueError):
        gm.povm_from_ensemble(gm.Ensemble(2, [(1.0, np.diag([1.0, 0]))]))


def test_steering_rank_examples(rng):
    assert gm.steering_rank(gm.max_entangled(2)) == 4
    prod = gm.BipartiteState((2, 2), np.kron(mk.random_density(2, rng), mk.random_density(2, rng)))
    assert gm.steering_rank(prod) == 1


def test_static_guessing_payoff_on_max_entangled():
    # steering the Bell state with a basis measurement gives perfectly distinguishable states
    p = gm.Povm(2, [np.diag([1.0, 0]), np.diag([0, 1.0])])
    v, _ = gm.static_guessing_payoff(gm.max_entangled(2), p)
    assert v == pytest.approx(1.0, abs=1e-7)


def test_payoff_ordering_offsets_agree(rng):
    a = ch.random_channel(2, 2, rng)
    b = ch.compose(ch.depolarizing(0.5), a)
    rho = gm.BipartiteState((2, 2), a.choi)
    sigma = gm.BipartiteState((2, 2), b.choi)
    obs = _random_family(rng, 2, 3)
    so, sp, off = gm.payoff_ordering(rho, sigma, obs)
    assert so == sp
    assert off[0] == pytest.approx(off[1], abs=1e-6)
