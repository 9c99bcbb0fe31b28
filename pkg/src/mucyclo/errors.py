class ResourceError(RuntimeError):
    """A configured search or enumeration cap was hit before an answer."""
