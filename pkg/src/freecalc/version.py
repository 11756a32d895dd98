"""Single source for the package version (kept importable without cycles)."""

VERSION = "0.1.0"
