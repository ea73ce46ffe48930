"""Desk-scale laboratory for pseudodeterministic constructions: toy
machines, circuits, CAPP estimators, NW generators, time-bounded
Kolmogorov measures, and the constructions built on them."""

__version__ = "0.1.0"
