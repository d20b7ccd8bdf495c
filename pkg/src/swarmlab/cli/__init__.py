"""Config-driven experiment runner."""
from .config import Config, ConfigError, load_config, parse_config, validate
from .main import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main

__all__ = ["Config", "ConfigError", "EXIT_CONFIG", "EXIT_OK", "EXIT_RUNTIME", "load_config",
           "main", "parse_config", "validate"]
