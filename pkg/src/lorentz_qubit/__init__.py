"""Continuously monitored qubit as a charge under stochastic Lorentz forces."""
__version__ = "0.1.0"
