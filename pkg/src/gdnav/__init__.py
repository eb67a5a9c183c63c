"""GNSS-denied inertial navigation: filters, flight simulator, Monte Carlo harness."""

__version__ = "0.1.0"
