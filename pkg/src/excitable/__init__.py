"""Simulation and contraction analysis of excitable neurons and networks."""

__version__ = "0.1.0"
