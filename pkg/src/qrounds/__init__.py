"""Quantum query algorithms with parallel queries and Fourier growth."""
