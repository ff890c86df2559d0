"""Variational free-boundary solver for rotational jets issuing from a nozzle."""

__version__ = "1.0.0"
