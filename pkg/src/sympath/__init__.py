"""Symplectic linear algebra, Maslov-type index theory for symplectic paths,
and desk-scale semiclassical trace formulas (Gutzwiller, Selberg/Poisson)."""

from sympath.policy import NumericPolicy, DEFAULT_POLICY

__all__ = ["NumericPolicy", "DEFAULT_POLICY"]
__version__ = "0.1.0"
