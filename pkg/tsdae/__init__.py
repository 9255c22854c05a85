"""Index-1 dynamic-algebraic equations on discrete time scales."""

__version__ = "0.1.0"
