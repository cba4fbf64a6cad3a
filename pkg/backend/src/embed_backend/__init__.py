"""Embedding microservice implementing the POST /embed wire protocol."""

__version__ = "0.1.0"
