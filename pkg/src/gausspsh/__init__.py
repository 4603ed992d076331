"""Numerical laboratory for complex Gaussian semigroups and psh correlation inequalities."""

__version__ = "0.1.0"
