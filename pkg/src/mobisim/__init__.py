"""System-level downlink cellular simulator.

Quantifies how UE velocity degrades downlink KPIs (mean throughput,
cell-edge throughput, spectral efficiency, Jain fairness) for a hexagonal
multi-cell network under closed-loop spatial multiplexing, per antenna
configuration (2x2 .. 4x4) and per scheduler (round-robin, proportional
fair).
"""

__version__ = "0.1.0"
