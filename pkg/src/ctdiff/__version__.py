"""Version information for ctdiff."""

__version__ = "0.3.0"
__version_info__ = tuple(int(x) for x in __version__.split("."))

# Package metadata
__title__ = "ctdiff"
__description__ = "Differential address-trace analysis for constant-time verification"
__license__ = "MIT"
