"""Benchmark harness: load generators and timing for the daemon."""
