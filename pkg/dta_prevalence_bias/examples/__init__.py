"""
Examples for dta-prevalence-bias package.

This module contains example code demonstrating how to use the package.
"""

__all__ = []
