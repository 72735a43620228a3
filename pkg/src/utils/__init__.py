"""
Utilities package for the toolkit
Contains logging helpers
"""
