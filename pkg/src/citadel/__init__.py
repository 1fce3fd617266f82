"""Citadel: a multi-role e-learning service with an HTTP/JSON API, a durable
embedded store, and an operator CLI."""

__version__ = "0.1.0"
