from .bias import BiasPoint, block_rate, simulate_bias_baseline, trajectory_csv
from .grinding import BudgetExceeded, GrindResult, grind_seed
from .strategies import STRATEGIES, Adversary, AdversaryConfig, AdversaryConfigError, AdversaryNode, unconsumed_rewards
