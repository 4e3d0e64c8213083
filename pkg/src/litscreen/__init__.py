"""litscreen: a self-hostable living literature review platform."""

__version__ = "0.1.0"
