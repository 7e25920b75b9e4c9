"""
nlclaw
Nonlocal traffic conservation laws: solvers, bound checks and eps sweeps
"""

__version__ = "1.0.0"
