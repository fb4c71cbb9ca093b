"""Updatable views programmed as putback strategies in Datalog."""

__version__ = "0.1.0"
