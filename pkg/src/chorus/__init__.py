"""FR2 mobility simulator with conditional handover, RACH variants and
beam-level handover-failure learning."""
from .config import SimConfig, desk_scale, load_config
from .engine import RunResult, run, run_batch

__all__ = ["SimConfig", "desk_scale", "load_config", "RunResult", "run", "run_batch"]
__version__ = "0.1.0"
