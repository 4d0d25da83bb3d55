"""
menroll - two-stage scheduling of a micro energy network with aggregated EV stations
"""

__version__ = "0.3.0"
