"""Integration tests covering interactions between layers."""

# Integration tests - components against the loopback mock web
