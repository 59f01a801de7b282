"""Monte-Carlo rounds of the guessing game described by a witness."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..channels import tensor_channels
from ..comparison import GameWitness

RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass
class SimulationReport:
    rounds: int
    seed: int
    bob_hits: int
    eve_hits: int
    bob_rate: float
    eve_rate: float
    bob_stderr: float
    eve_stderr: float
    p_bob: float
    p_eve: float
    bob_within_3sigma: bool
    eve_within_3sigma: bool
    rng: str = RNG_ALGORITHM

    def as_dict(self) -> dict:
        return asdict(self)


def outcome_table(channel, ensemble, povm) -> np.ndarray:
    """``table[x, y] = Tr[Q_y channel(rho_x)]``, clipped and renormalized per row."""
    rows = []
    for _, rho in ensemble.items:
        out = channel(rho)
        row = np.array([np.real(np.trace(q @ out)) for q in povm.elements])
        row = np.clip(row, 0.0, None)
        rows.append(row / row.sum())
    return np.array(rows)


def _sample(table, xs, rng):
    cum = np.cumsum(table, axis=1)
    cum[:, -1] = 1.0
    u = rng.random(xs.size)
    # index of the first cumulative weight exceeding u
    return (u[:, None] >= cum[xs]).sum(axis=1)


def simulate(w: GameWitness, rounds: int, seed: int) -> SimulationReport:
    """Play ``rounds`` i.i.d. rounds: Alice draws ``x``, Bob and Eve measure their outputs and guess."""
    if w.ensemble is None or w.bob_channel is None:
        raise ValueError("witness lacks the ensemble or channels needed for simulation")
    if rounds < 1:
        raise ValueError("rounds must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    bob = tensor_channels(w.bob_channel, w.side_channel)
    eve = tensor_channels(w.eve_channel, w.side_channel)
    tb = outcome_table(bob, w.ensemble, w.bob_povm)
    te = outcome_table(eve, w.ensemble, w.eve_povm)
    probs = w.ensemble.probs
    xs = rng.choice(probs.size, size=rounds, p=probs / probs.sum())
    yb = _sample(tb, xs, rng)
    ye = _sample(te, xs, rng)
    hb = int(np.sum(yb == xs))
    he = int(np.sum(ye == xs))
    sb = float(np.sqrt(max(w.p_bob * (1 - w.p_bob), 0.0) / rounds))
    se = float(np.sqrt(max(w.p_eve * (1 - w.p_eve), 0.0) / rounds))
    rb, re_ = hb / rounds, he / rounds
    return SimulationReport(
        rounds=rounds,
        seed=seed,
        bob_hits=hb,
        eve_hits=he,
        bob_rate=rb,
        eve_rate=re_,
        bob_stderr=sb,
        eve_stderr=se,
        p_bob=w.p_bob,
        p_eve=w.p_eve,
        bob_within_3sigma=bool(abs(rb - w.p_bob) <= 3 * sb + 1e-12),
        eve_within_3sigma=bool(abs(re_ - w.p_eve) <= 3 * se + 1e-12),
    )
