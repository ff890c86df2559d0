"""Tests for the numerical services."""
