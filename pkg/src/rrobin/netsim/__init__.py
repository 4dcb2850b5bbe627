from .config import ConfigError, LatencyModel, NetConfig, Partition
from .report import CSV_COLUMNS, RoundOutcome, SimReport
from .sim import Simulation, run_simulation
