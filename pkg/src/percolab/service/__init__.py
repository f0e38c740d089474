"""FastAPI service wrapping the lab; the CLI drives the same handlers in-process."""
