"""RPL DODAG simulator with rank-attack adversaries and sink-side detection."""

__version__ = "0.1.0"
