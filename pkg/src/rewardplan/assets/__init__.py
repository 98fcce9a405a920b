"""Packaged data: prompt templates and shop fixtures."""
