"""Cylinder absolute games on p-adic solenoids: exact engines, strategies and counting."""
from .arith import DomainError, frac, fmt
from .solenoid import Ball, Cylinder, Point, PrimeSet, cylinder_normalize, distance
from .affine import AffineEndo, avoidance_params

__all__ = ["DomainError", "frac", "fmt", "Ball", "Cylinder", "Point", "PrimeSet",
           "cylinder_normalize", "distance", "AffineEndo", "avoidance_params"]
