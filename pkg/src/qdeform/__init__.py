"""Exact construction and verification of discrete Rieffel-type deformations
of finite quantum groups."""
