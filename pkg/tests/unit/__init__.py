"""Unit tests - single functions and classes on small seeded inputs."""
