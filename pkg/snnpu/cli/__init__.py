"""snnpu CLI module."""
