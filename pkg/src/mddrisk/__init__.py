"""Maximum-drawdown performance measures under Brownian and fractional Brownian motion."""

__version__ = "0.1.0"
