"""Top-level package for the webpurge pytest suite."""
