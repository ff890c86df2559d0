"""Tests for error reporting and exit codes."""
