"""Component tests - acceptance-scale numerical checks."""
