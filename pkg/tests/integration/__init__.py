"""Integration tests - the CLI end to end on temporary files."""
