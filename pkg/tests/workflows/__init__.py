"""Tests for the subcommand workflows and the command line."""
