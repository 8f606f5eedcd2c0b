"""End-to-end tests of the webpurge command against the loopback mock web."""
