"""Cluster-conditional corridor transfer limits and limit-switching unit commitment."""

__version__ = "0.1.0"
