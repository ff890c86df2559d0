"""Tests for the run configuration and report schemas."""
