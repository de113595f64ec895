"""Spike echo state network forecasting library and benchmark tool"""

try:
    from ._version import __version__  # noqa: F401
except ImportError:
    __version__ = "unknown"
