class ConfigurationError(ValueError):
    """Invalid experiment or network configuration (bad sizes, unknown keys)."""
