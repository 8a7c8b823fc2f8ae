"""
Typed configuration: schema, file grammar, overrides and manifests.
"""
from pyafn.config.tools import Config
from pyafn.config.tools import parse_config
from pyafn.config.tools import parse_config_lines
from pyafn.config.tools import render
from pyafn.config.tools import SCHEMA

__all__ = (
    "Config",
    "SCHEMA",
    "parse_config",
    "parse_config_lines",
    "render",
)
