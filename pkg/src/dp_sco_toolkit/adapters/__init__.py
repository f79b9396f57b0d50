"""Algorithm adapters for the benchmarked private optimizers."""
