"""Desk-scale proof-of-authority ledger for V2X messaging and parking payments."""

__version__ = "0.1.0"
