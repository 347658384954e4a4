"""Random recursive laminations of the disk, their height processes and limits."""

__version__ = "0.1.0"
