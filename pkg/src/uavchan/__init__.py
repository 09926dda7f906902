"""Cooperative mmWave channel modeling in simulated UAV networks.

Synthetic air-to-ground channel scenes, pilot-based dataset collection,
ring-topology formation under link-budget constraints, distributed
adversarial training with generated-sample exchange, and convergence /
accuracy / rate evaluation.
"""

__version__ = "0.1.0"
