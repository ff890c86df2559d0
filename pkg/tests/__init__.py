"""
Test Suite for jetflow

Test structure:
    tests/core/        - Exceptions, settings and the workflow engine
    tests/middleware/  - Error reports and exit codes
    tests/schemas/     - Run configuration and report schemas
    tests/services/    - Numerical services (profiles, grid, solver, fit, checks)
    tests/workflows/   - Subcommand workflows and the command line

Usage:
    pytest tests/                # Run the fast suite
    pytest tests/ -m slow        # Acceptance-scale runs only
"""
