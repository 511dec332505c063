"""Single source of the package version."""

VERSION = "0.1.0"
