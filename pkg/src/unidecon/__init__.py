"""Kernel estimators for the uniform deconvolution model ``X = Y + Z``."""

__version__ = "0.1.0"
