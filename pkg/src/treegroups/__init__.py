"""Section calculus, Haar sampling and random-subgroup experiments for
groups acting on regular rooted trees."""

__version__ = "0.1.0"
