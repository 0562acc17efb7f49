"""Operators, sharp constants and numerical sharpness checks for Hardy,
Young and Hardy–Littlewood–Sobolev type inequalities."""

__version__ = "0.1.0"
