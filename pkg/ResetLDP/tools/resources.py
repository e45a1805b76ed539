"""Package paths and metadata lookups."""
import configparser
from functools import lru_cache
from pathlib import Path
from typing import Dict


def plugin_path(*args: str) -> str:
    """Get the path to the package root, or to a file or folder inside it."""
    path = Path(__file__).resolve().parent.parent
    for item in args:
        path = path / item
    return str(path)


@lru_cache(maxsize=1)
def metadata() -> Dict[str, str]:
    parser = configparser.ConfigParser()
    parser.read(plugin_path("metadata.txt"), encoding="utf-8")
    return dict(parser["general"])


def plugin_name() -> str:
    """Name of the package as given in metadata.txt"""
    return metadata()["name"]
