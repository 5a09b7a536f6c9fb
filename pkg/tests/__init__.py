"""
snnpu Tests Package
"""
