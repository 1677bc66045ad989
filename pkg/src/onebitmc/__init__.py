"""1-bit matrix completion under an exact rank constraint."""

__version__ = "0.1.0"
