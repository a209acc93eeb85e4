"""Random sampling with removal over consistent spaces, violator spaces and
LP-type problems."""

__version__ = "0.1.0"
