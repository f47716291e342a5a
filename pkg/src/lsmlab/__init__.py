"""lsmlab: deterministic spiking-reservoir (LSM) simulator and experiment harness."""

__version__ = "0.1.0"
