"""Static and documentation audits for on-chain DAO governance."""

__version__ = "0.1.0"
