"""Modeling, simulation and design tools for fabric pneumatic shoulder-exosuit actuators."""

__version__ = "0.1.0"
