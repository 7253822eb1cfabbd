"""Monte Carlo laboratory for arithmetic random waves on the flat torus."""

__version__ = "0.1.0"
