"""Operational shell: CLI, HTTP review service, and file-backed store."""
