"""
Test package for the higher-derivative Klein-Gordon toolkit
Contains unit tests for the numerical services and the command line
"""
