from .driver import LockstepNetwork, honest_network
from .mempool import EnrollPool, TxPool, unconsumed_rewards
from .node import (
    Node,
    Phase,
    Proposal,
    Send,
    SetView,
    on_block_received,
    on_confirm_phase_end,
    on_intent_phase_end,
    on_round_start,
)
