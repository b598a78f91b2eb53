"""Traceroute/MPLS probing, a command-driven measurement agent, a deployment
controller and a resource-budget simulator."""

__version__ = "0.1.0"
