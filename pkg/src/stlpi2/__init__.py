"""STL-constrained policy improvement guided by prescribed-performance control."""

__version__ = "0.1.0"
