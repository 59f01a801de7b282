import numpy as np

from antidegrade import channels as ch
from antidegrade import sdp
from antidegrade.comparison import GameWitness
from antidegrade.games import Povm, ensemble_from_povm


def toy_witness() -> GameWitness:
    """Identity versus a constant channel, basis ensemble, exact decoders."""
    side = ch.symmetric_channel(2)
    bob, eve = ch.identity_channel(2), ch.constant_channel(2)
    bc, ec = ch.tensor_channels(bob, side), ch.tensor_channels(eve, side)
    els = [np.kron(np.diag([1.0, 0]), np.eye(3)), np.kron(np.diag([0, 1.0]), np.eye(3))]
    alice = Povm(6, els)
    ens = ensemble_from_povm(alice, bc)
    db = sdp.discriminate([p * bc(r) for p, r in ens.items])
    de = sdp.discriminate([p * ec(r) for p, r in ens.items])
    return GameWitness(side, ens, alice, Povm(bc.dim_out, db.povm), Povm(ec.dim_out, de.povm),
                       db.value, de.value, de.upper, bob, eve)
