"""Data models for experiment configs and results."""
