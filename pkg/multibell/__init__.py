"""Analysis of multi-setting Bell experiments: states, inequalities, bounds, and simulation."""

__version__ = "0.1.0"
