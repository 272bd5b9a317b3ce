"""Deontic-logic workbench: SDL and Aqvist's system E over finite
models, with a typed-lambda embedding pipeline down to first-order
problems and TPTP output."""

__version__ = "0.1.0"
