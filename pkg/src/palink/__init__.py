"""Link-level MIMO-OFDM simulation with nonlinear power amplifiers.

Subpackages cover the transform kernels, 16QAM modem, multipath channel,
Rapp amplifier, LS/ZF receive chain, genie MLD benchmarks, a small dense
neural-network engine, the three learned receivers, dataset generation,
and the experiment harness.
"""

from palink.config import LinkConfig, desk_profile, paper_profile

__all__ = ["LinkConfig", "desk_profile", "paper_profile"]
__version__ = "0.1.0"
