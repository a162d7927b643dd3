"""C2-smooth isogeometric spline spaces over G2 two-patch planar domains."""

__version__ = "0.1.0"
