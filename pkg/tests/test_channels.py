import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antidegrade import channels as ch
from antidegrade import matkernel as mk


def _kraus_apply(ops, rho):
    return sum(k @ rho @ k.conj().T for k in ops)


def _nonzero_spectrum(m, n):
    w = np.sort(np.linalg.eigvalsh(m))[::-1]
    out = np.zeros(n)
    out[: min(n, w.size)] = w[:n]
    return out


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_choi_roundtrip(da, db, seed):
    rng = np.random.default_rng(seed)
    c = ch.random_channel(da, db, rng)
    again = ch.from_choi(c.choi, da, db)
    assert np.linalg.norm(again.choi - c.choi) <= 1e-10
    k = ch.to_kraus(c)
    assert k.completeness_error() < 1e-10
    assert np.linalg.norm(ch.from_kraus(k).choi - c.choi) <= 1e-10


def test_apply_matches_kraus_sum(rng):
    ops = ch.to_kraus(ch.random_channel(3, 2, rng)).operators
    c = ch.from_kraus(ops)
    rho = mk.random_density(3, rng)
    np.testing.assert_allclose(c(rho), _kraus_apply(ops, rho), atol=1e-12)


def test_choi_validation():
    with pytest.raises(ch.ChannelError):
        ch.Channel(2, 2, np.eye(4))  # trace 4
    with pytest.raises(ch.ChannelError):
        ch.Channel(2, 2, np.diag([0.5, 0.5, 0.0, 0.0]))  # not trace preserving
    with pytest.raises(ch.ChannelError):
        ch.Channel(2, 2, np.diag([0.75, -0.25, 0.25, 0.25]))  # not CP
    with pytest.raises(ch.ChannelError):
        ch.from_kraus([np.eye(2) * 0.9])
    with pytest.raises(ch.ChannelError):
        ch.erasure(1.5)


def test_complementary_shares_pure_output_spectra(rng):
    for c in [ch.random_channel(2, 2, rng), ch.amplitude_damping(0.3), ch.erasure(0.25), ch.depolarizing(0.4)]:
        e = ch.complementary(c)
        for _ in range(3):
            v = rng.normal(size=c.dim_in) + 1j * rng.normal(size=c.dim_in)
            psi = mk.proj(v / np.linalg.norm(v))
            n = max(c.dim_out, e.dim_out)
            np.testing.assert_allclose(_nonzero_spectrum(c(psi), n), _nonzero_spectrum(e(psi), n), atol=1e-10)


def test_stinespring_is_isometry(rng):
    c = ch.random_channel(2, 3, rng)
    s = ch.stinespring(c)
    np.testing.assert_allclose(s.isometry.conj().T @ s.isometry, np.eye(2), atol=1e-12)
    rho = mk.random_density(2, rng)
    out = s.isometry @ rho @ s.isometry.conj().T
    np.testing.assert_allclose(mk.partial_trace(out, (s.dim_out, s.dim_env), [0]), c(rho), atol=1e-12)


def test_erasure_action():
    c = ch.erasure(0.3)
    rho = np.array([[0.6, 0.2j], [-0.2j, 0.4]])
    out = c(rho)
    np.testing.assert_allclose(out[:2, :2], 0.7 * rho, atol=1e-14)
    assert out[2, 2] == pytest.approx(0.3)


def test_amplitude_damping_action():
    g = 0.4
    out = ch.amplitude_damping(g)(np.array([[0, 0], [0, 1.0]]))
    np.testing.assert_allclose(out, np.diag([g, 1 - g]), atol=1e-14)


def test_depolarizing_action(rng):
    rho = mk.random_density(3, rng)
    out = ch.depolarizing(0.25, 3)(rho)
    np.testing.assert_allclose(out, 0.75 * rho + 0.25 * np.eye(3) / 3, atol=1e-13)


def test_compose_further_erasure():
    # erasure(p) followed by further erasure(q) is erasure(1 - (1-p)(1-q))
    c = ch.compose(ch.further_erasure(1 / 3), ch.erasure(0.4))
    np.testing.assert_allclose(c.choi, ch.erasure(0.6).choi, atol=1e-12)


def test_apply_local_matches_kron(rng):
    a = ch.random_channel(2, 3, rng)
    x = mk.random_density(2, rng)
    y = mk.random_density(2, rng)
    out = ch.apply_local(a, np.kron(x, y), (2, 2), 1)
    np.testing.assert_allclose(out, np.kron(x, a(y)), atol=1e-12)


def test_tensor_channels(rng):
    a = ch.random_channel(2, 2, rng)
    b = ch.random_channel(2, 3, rng)
    x = mk.random_density(2, rng)
    y = mk.random_density(2, rng)
    np.testing.assert_allclose(ch.tensor_channels(a, b)(np.kron(x, y)), np.kron(a(x), b(y)), atol=1e-12)


def test_flagged_mixture_and_trace_out_flag(rng):
    cs = [ch.random_channel(2, 2, rng) for _ in range(2)]
    f = ch.flagged_mixture(cs, [0.3, 0.7])
    m = ch.mixture(cs, [0.3, 0.7])
    np.testing.assert_allclose(ch.compose(ch.trace_out_flag(2, 2), f).choi, m.choi, atol=1e-12)
    with pytest.raises(ch.ChannelError):
        ch.mixture(cs, [0.5, 0.6])


def test_symmetric_channel():
    c = ch.symmetric_channel(2)
    assert (c.dim_in, c.dim_out) == (3, 2)
    # outputs of |00> and |11> are orthogonal pure states
    np.testing.assert_allclose(c(np.diag([1.0, 0, 0])), np.diag([1.0, 0]), atol=1e-14)
    assert ch.is_complete_channel(c) == (4, True)
    with pytest.raises(ch.ChannelError):
        ch.symmetric_channel(1)


def test_completeness_of_zoo():
    assert ch.is_complete_channel(ch.identity_channel(2)) == (4, True)
    assert ch.is_complete_channel(ch.constant_channel(2))[0] == 1
    assert ch.is_complete_channel(ch.erasure(0.3))[1] is False  # no coherence with the flag
