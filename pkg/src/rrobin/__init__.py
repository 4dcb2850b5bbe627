"""Robust Round Robin: age-ordered leader candidates plus quorum endorsement."""

__version__ = "0.1.0"
