"""Embedded scenario files."""
