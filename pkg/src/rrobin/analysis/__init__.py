from .formulas import DomainError, Throughput, pr_ae, pr_afs, pr_alv, pr_bfs, pr_blv, throughput
from .logprob import LogProb, log_binom_pmf, log_upper_tail, logsumexp
from .sweep import SWEEP_COLUMNS, SweepRow, SweepRule, quorum_sweep, recommend, sweep_csv

__all__ = [
    "DomainError", "LogProb", "SWEEP_COLUMNS", "SweepRow", "SweepRule", "Throughput",
    "log_binom_pmf", "log_upper_tail", "logsumexp", "pr_ae", "pr_afs", "pr_alv", "pr_bfs",
    "pr_blv", "quorum_sweep", "recommend", "sweep_csv", "throughput",
]
