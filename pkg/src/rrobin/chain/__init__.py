from .dump import ChainDump, decode_blocks, dump_chain, encode_blocks, load_chain
from .forkchoice import NoValidBranch, branch_length, divergence_prefers, prefer, select_branch
from .messages import Block, ConfirmMsg, Genesis, GenesisMember, IntentMsg, tx_hash
from .state import BranchState, genesis_state, transition
from .store import AddOutcome, Branch, ChainStore, Header, Status
from .verify import Evidence, detect_equivocation, load_branch, verify_branch, verify_endorsement
