"""
Test suite for the Schmidt witness toolkit.
"""
