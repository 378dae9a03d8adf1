"""Random Boolean networks with guide-RNA editing on NK/NKCS landscapes."""

__version__ = "0.1.0"
