"""Command-line interface package.

Click commands, user-facing message templates, rich output formatting and
small helpers shared by the commands.
"""
