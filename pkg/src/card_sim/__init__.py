"""Contact-based resource discovery (CARD) for MANETs: simulator and experiment tools."""

__version__ = "0.1.0"
