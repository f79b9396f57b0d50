"""Benchmark orchestration, rate tables and verification services."""
