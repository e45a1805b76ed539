"""
Layered settings store.

Values set during the run win over environment variables
named ``RESET_LDP_<KEY>``, which win over the given default.
"""
import os
from typing import Any, Callable, Dict, Optional

ENV_PREFIX = "RESET_LDP_"

_SETTINGS: Dict[str, Any] = {}


def setting_env_name(key: str) -> str:
    return f"{ENV_PREFIX}{key.upper()}"


def get_setting(
    key: str, default: Optional[Any] = None, typehint: Callable[[str], Any] = str
) -> Any:
    if key in _SETTINGS:
        return _SETTINGS[key]
    value = os.environ.get(setting_env_name(key))
    if value is None or value == "":
        return default
    if typehint is bool:
        return value.strip().lower() in ("1", "true", "yes", "on")
    return typehint(value)


def set_setting(key: str, value: Any) -> None:
    _SETTINGS[key] = value


def clear_setting(key: str) -> None:
    _SETTINGS.pop(key, None)
