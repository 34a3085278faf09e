"""Ligase-conditioned junction-tree VAE pipeline for molecular glue design."""

__version__ = "0.1.0"
