"""
Fallcat - Test Suite
"""
