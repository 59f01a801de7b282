import pytest

from antidegrade.cli.simulate import outcome_table, simulate
from antidegrade.channels import tensor_channels

from helpers import toy_witness


def test_toy_witness_values():
    w = toy_witness()
    assert w.p_bob == pytest.approx(1.0, abs=1e-7)
    assert w.p_eve == pytest.approx(0.5, abs=1e-7)
    assert w.certified_gap == pytest.approx(0.5, abs=1e-6)


def test_outcome_table_rows_are_distributions():
    w = toy_witness()
    t = outcome_table(tensor_channels(w.bob_channel, w.side_channel), w.ensemble, w.bob_povm)
    assert t.shape == (2, 2)
    assert (t >= 0).all()
    assert t.sum(axis=1) == pytest.approx([1.0, 1.0])


def test_simulation_reproduces_probabilities():
    w = toy_witness()
    rep = simulate(w, 20_000, seed=3)
    assert rep.bob_within_3sigma and rep.eve_within_3sigma
    assert rep.bob_rate == pytest.approx(1.0, abs=1e-3)
    assert rep.eve_rate == pytest.approx(0.5, abs=0.02)


def test_simulation_is_seeded():
    w = toy_witness()
    assert simulate(w, 5000, 11).as_dict() == simulate(w, 5000, 11).as_dict()
    assert simulate(w, 5000, 11).eve_hits != simulate(w, 5000, 12).eve_hits


def test_simulation_rejects_bad_rounds():
    with pytest.raises(ValueError):
        simulate(toy_witness(), 0, 1)
