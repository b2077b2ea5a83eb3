"""Subcommand registrations for the primline CLI."""
