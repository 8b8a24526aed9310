"""Fast-forwarding circuit synthesis and desk-scale verification toolkit."""

__version__ = "0.1.0"
