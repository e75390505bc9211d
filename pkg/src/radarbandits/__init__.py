"""Decentralized multi-player bandit sub-band selection for cognitive radar networks."""
__version__ = "0.1.0"
