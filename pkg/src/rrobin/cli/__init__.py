from .config import ConfigFileError, OutputSpec, RunConfig, load_run_config, parse_run_config
from .main import build_parser, main

__all__ = ["ConfigFileError", "OutputSpec", "RunConfig", "build_parser", "load_run_config", "main", "parse_run_config"]
