from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("trical")
except PackageNotFoundError:
    __version__ = "unknown"
