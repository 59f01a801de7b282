"""Decide whether quantum channels are antidegradable.

A positive answer comes with a degrading channel ``D`` such that
``N = D o N_env``; a negative one with a guessing game, played over the channel
and a symmetric public side channel, in which the legitimate receiver beats
the environment.
"""

from ._kernel import BACKEND
from .channels import (
    Channel,
    ChannelError,
    amplitude_damping,
    complementary,
    compose,
    constant_channel,
    depolarizing,
    erasure,
    flagged_mixture,
    from_choi,
    from_kraus,
    identity_channel,
    is_complete_channel,
    mixture,
    random_channel,
    stinespring,
    symmetric_channel,
    tensor_channels,
    to_kraus,
)
from .comparison import (
    Degradable,
    GameWitness,
    Inconclusive,
    NotDegradable,
    WitnessConfig,
    is_antidegradable,
    is_complete_state,
    is_extension,
    local_degradable,
    witness_search,
)
from .games import BipartiteState, Ensemble, Povm, helstrom, max_entangled
from .sdp import SolverConfig, degradability_sdp, guessing_probability, simulating_povm_sdp

__version__ = "0.1.0"
