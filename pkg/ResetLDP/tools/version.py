from .resources import metadata, plugin_name


def version() -> str:
    return metadata()["version"]


def version_header() -> str:
    """One-line identification embedded in every output file."""
    return f"{plugin_name()} {version()}"
