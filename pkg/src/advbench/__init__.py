"""advbench - Benchmark gradient-based adversarial attacks and rank them by optimality."""

__version__ = "0.1.0"
