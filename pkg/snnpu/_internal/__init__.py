"""
snnpu internal modules.

These are implementation details and should not be imported directly.
Use the public API from `snnpu` instead.
"""
