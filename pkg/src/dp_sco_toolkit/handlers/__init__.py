"""Command-line handlers for the benchmark runner."""
