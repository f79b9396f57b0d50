"""Differentially private stochastic convex optimization toolkit.

Noisy mirror descent, iterative localization and binary-tree variance-reduced
Frank-Wolfe for l1/lp-bounded domains, with hard-instance generators and a
benchmark runner.
"""

__version__ = "0.1.0"
