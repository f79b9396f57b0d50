"""Test suite for the DP-SCO toolkit."""
