"""Command-line interface: ``antidegrade <subcommand>``."""
