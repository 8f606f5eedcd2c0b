"""webpurge: free storage by replacing web-redownloadable files with recipes."""

__version__ = "0.1.0"
