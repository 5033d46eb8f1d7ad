"""The compression protocols and their rate formulas."""
from .common import (ABORT_TAGS, MODES, OConstants, ProtocolOutcome, ProtocolParams,
                     TrialRandomness, trial_randomness)
from .estimation import estimate_joint_type
from .interactive import run_int2, run_int3, run_rst1, run_rst2
from .rates import RateBounds, rate_bounds
from .slepian_wolf import run_sw1, run_sw2, run_sw3

__all__ = [
    "ABORT_TAGS", "MODES", "OConstants", "ProtocolOutcome", "ProtocolParams", "RateBounds",
    "TrialRandomness", "estimate_joint_type", "rate_bounds", "run_int2", "run_int3", "run_rst1",
    "run_rst2", "run_sw1", "run_sw2", "run_sw3", "trial_randomness",
]
