"""Deployment campaign controller."""
from probekit.controller.campaign import CampaignReport, DeploymentRecord, Status, run_campaign, summarize
from probekit.controller.config import Event, EventSchedule, NodeDescriptor, load_node_config, load_schedule
from probekit.controller.executors import ExecutorError, RemoteShellExecutor, SimulatedExecutor
from probekit.controller.scheduling import (
    Assigned, CampaignPolicy, Discarded, NodeRegistry, Policy, Waited, select_node,
)

__all__ = [
    "Assigned", "CampaignPolicy", "CampaignReport", "DeploymentRecord", "Discarded", "Event",
    "EventSchedule", "ExecutorError", "NodeDescriptor", "NodeRegistry", "Policy",
    "RemoteShellExecutor", "SimulatedExecutor", "Status", "Waited", "load_node_config",
    "load_schedule", "run_campaign", "select_node", "summarize",
]
