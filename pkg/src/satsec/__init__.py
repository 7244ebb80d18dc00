"""Secrecy-rate optimization for bidirectional satellite links with XOR network coding."""

__version__ = "0.1.0"
