"""FO(C) causal logic toolkit."""

__version__ = "0.1.0"
