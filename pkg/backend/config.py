"""
Configuration management for the hexfam toolkit.
Reads environment variables (optionally from a .env file) and the YAML
settings file that carries pipeline, search, export and classifier defaults.
"""

import logging
import os
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    """Defaults for the projection / bucketing / rainbow pipeline"""
    seed: int = 0
    phi: str = "auto"  # "auto" or a rational string in radians
    projection_attempts: int = 10
    inclination_tolerance: str = "1/1000000000000"
    max_precision_bits: int = 4096
    grid_shifts: int = 4
    theta_cos_sq_floor: Optional[str] = None  # None -> derived from params

    def __post_init__(self):
        if self.projection_attempts < 1:
            raise ValueError(f"projection_attempts must be >= 1, got {self.projection_attempts}")
        if self.grid_shifts < 1:
            raise ValueError(f"grid_shifts must be >= 1, got {self.grid_shifts}")
        if Fraction(self.inclination_tolerance) <= 0:
            raise ValueError(f"inclination_tolerance must be positive, got {self.inclination_tolerance}")
        if self.max_precision_bits < 64:
            raise ValueError(f"max_precision_bits must be >= 64, got {self.max_precision_bits}")

    @property
    def tolerance(self) -> Fraction:
        return Fraction(self.inclination_tolerance)


@dataclass
class SearchConfig:
    """Limits for the exhaustive extremal search"""
    max_points: int = 10
    node_budget: int = 2_000_000
    time_budget_seconds: float = 600.0

    def __post_init__(self):
        if self.max_points < 3:
            raise ValueError(f"max_points must be >= 3, got {self.max_points}")
        if self.node_budget < 1:
            raise ValueError(f"node_budget must be >= 1, got {self.node_budget}")


@dataclass
class ExportConfig:
    """Figure exporter settings"""
    significant_digits: int = 12
    svg_size: int = 800

    def __post_init__(self):
        if not 1 <= self.significant_digits <= 50:
            raise ValueError(f"significant_digits must be in 1..50, got {self.significant_digits}")


@dataclass
class ClassifyConfig:
    """Pair classifier settings"""
    interior_mode: str = "either"  # "either" or "both"

    def __post_init__(self):
        if self.interior_mode not in ("either", "both"):
            raise ValueError(f"Invalid interior_mode: {self.interior_mode}. Must be 'either' or 'both'")


_SECTIONS = {
    "pipeline": PipelineConfig,
    "search": SearchConfig,
    "export": ExportConfig,
    "classify": ClassifyConfig,
}


class Config:
    """
    Centralized configuration for library defaults and CLI behaviour.

    Environment Variables:
    - HEXFAM_THREADS: default worker-thread count (default: 1)
    - HEXFAM_LOG_LEVEL: logging level name (default: "INFO")
    - HEXFAM_SETTINGS: path to the YAML settings file
      (default: config/hexfam.yaml in the project root)
    """

    def __init__(self, settings_path: Optional[str] = None):
        self.project_root = Path(__file__).parent.parent
        self.settings_path = Path(
            settings_path or os.getenv("HEXFAM_SETTINGS", str(self.project_root / "config" / "hexfam.yaml"))
        )
        self._settings = self._load_settings(self.settings_path)

    def _load_settings(self, path: Path) -> Dict[str, Any]:
        """Load the YAML settings file; a missing file means built-in defaults"""
        if not path.exists():
            logger.debug(f"Settings file {path} not found, using built-in defaults")
            return {}

        if path.suffix.lower() not in (".yaml", ".yml"):
            raise ValueError(f"Unsupported settings file format: {path.suffix}")

        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}

        if not isinstance(data, dict):
            raise ValueError(f"Settings file {path} must contain a mapping at top level")

        for section in data:
            if section not in _SECTIONS:
                logger.warning(f"Ignoring unknown settings section '{section}' in {path}")
        return data

    def _section(self, name: str):
        cls = _SECTIONS[name]
        raw = self._settings.get(name) or {}
        known = {f.name for f in fields(cls)}
        values = {}
        for key, value in raw.items():
            if key in known:
                values[key] = value
            else:
                logger.warning(f"Ignoring unknown key '{name}.{key}' in {self.settings_path}")
        return cls(**values)

    def get_pipeline_config(self) -> PipelineConfig:
        """Get pipeline defaults"""
        return self._section("pipeline")

    def get_search_config(self) -> SearchConfig:
        """Get extremal search limits"""
        return self._section("search")

    def get_export_config(self) -> ExportConfig:
        """Get exporter settings"""
        return self._section("export")

    def get_classify_config(self) -> ClassifyConfig:
        """Get classifier settings"""
        return self._section("classify")

    def get_thread_count(self) -> int:
        """Default worker threads, from HEXFAM_THREADS"""
        raw = os.getenv("HEXFAM_THREADS", "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"HEXFAM_THREADS must be an integer, got {raw!r}")
        if threads < 1:
            raise ValueError(f"HEXFAM_THREADS must be >= 1, got {threads}")
        return threads

    def get_logging_config(self) -> Dict[str, Any]:
        """Get logging configuration"""
        return {
            "level": os.getenv("HEXFAM_LOG_LEVEL", "INFO").upper(),
            "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        }


# Global configuration instance
config = Config()
