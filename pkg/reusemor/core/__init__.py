"""Core configuration, errors and timing."""
