"""Tests for exceptions, settings and the workflow engine."""
