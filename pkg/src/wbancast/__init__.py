"""Discrete-event simulator for total-order convergecast on a body-area network."""

__version__ = "0.1.0"
