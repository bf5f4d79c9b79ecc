"""Slum Severity Index toolkit package."""

__version__ = "1.0.0"
__author__ = "ssikit developers"
__description__ = "Census-derived Slum Severity Index with factor analysis and GLCM texture validation"
