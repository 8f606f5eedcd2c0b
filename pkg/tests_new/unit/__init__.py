"""Unit tests for isolated business logic and helpers."""

# Unit tests - fast, isolated tests for individual functions
