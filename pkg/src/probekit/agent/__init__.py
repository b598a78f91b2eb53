"""Command-driven measurement agent."""
from probekit.agent.core import Agent, AgentState, handle
from probekit.agent.protocol import Command, CommandKind, parse_command
from probekit.agent.server import serve

__all__ = ["Agent", "AgentState", "Command", "CommandKind", "handle", "parse_command", "serve"]
