"""Business logic services package.

Contains the largest-file scanner, download provenance parsing, recipe
creation and encryption, the recipe store, the purge engine and the
study-style reporting over corpora of largest files.
"""
