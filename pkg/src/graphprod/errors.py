"""Exception types shared across modules."""
from __future__ import annotations


class ResourceCapError(RuntimeError):
    """A requested computation exceeds a configured size limit."""
