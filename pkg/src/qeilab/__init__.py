"""Numerical laboratory for one-particle energy densities in integrable models."""
