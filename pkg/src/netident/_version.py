"""Single source for the tool version, importable without package side effects."""

__version__ = "0.1.0"
