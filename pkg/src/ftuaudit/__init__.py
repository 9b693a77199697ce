"""Disparate-impact audits of aware vs unaware classifiers with exact multiplicity bounds."""

__version__ = "0.1.0"
