"""Campaign configuration from defaults, environment, config file and CLI flags."""

import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from platformdirs import user_config_dir

from .exceptions import CalibrationError, ConfigurationError, InvalidInputError
from .physical_model import DEFAULT_DRIFT_TARGET, NoiseConfig, calibrate_drift_sigma
from .protocol_engine import Protocol, ProtocolSetting, all_settings, recorded_settings
from .reference_data import DARK_COUNT_PROBABILITIES, TRIGGERS_PER_SETTING
from .report_writer import FORMATS

if sys.version_info >= (3, 11):
    import tomllib
else:
    try:
        import tomli as tomllib
    except ImportError:
        tomllib = None

CONFIG_ENV_VAR = "QUTRITCOMM_CONFIG"
SEED_ENV_VAR = "QUTRITCOMM_SEED"

TOP_LEVEL_KEYS = {"protocol", "settings", "seed", "format", "out", "concurrency", "noise"}
NOISE_KEYS = {"dark_prob", "click_prob", "drift_sigma", "drift_target", "triggers"}
SETTINGS_MODES = ("recorded", "exhaustive")


def _noise_defaults() -> Dict[str, Any]:
    return {
        "dark_prob": list(DARK_COUNT_PROBABILITIES),
        "click_prob": 4.0e-3,
        "drift_sigma": None,
        "drift_target": DEFAULT_DRIFT_TARGET,
        "triggers": TRIGGERS_PER_SETTING,
    }


@dataclass
class RunConfig:
    """A fully resolved campaign definition.

    Attributes:
        protocol: Protocol code (ss, dba or ccp)
        settings: "recorded", "exhaustive", or explicit flat setting lists
        seed: Master seed; every random draw of the campaign derives from it
        format: csv, json or markdown
        out: Output path, or None for stdout
        concurrency: Settings simulated at once
        noise: Noise parameters; drift_sigma None means calibrate from drift_target
        zero_noise: Drop dark counts and drift, keep click_prob and triggers
    """

    protocol: str = Protocol.SECRET_SHARING.value
    settings: Union[str, List[List[int]]] = "recorded"
    seed: int = 0
    format: str = "csv"
    out: Optional[str] = None
    concurrency: int = 3
    noise: Dict[str, Any] = field(default_factory=_noise_defaults)
    zero_noise: bool = False

    def noise_config(self) -> NoiseConfig:
        """Build the NoiseConfig, calibrating the drift spread if needed.

        Raises:
            ConfigurationError: If a noise parameter violates its invariant
        """
        sigma = self.noise.get("drift_sigma")
        dark = self.noise["dark_prob"]
        try:
            if self.zero_noise:
                sigma, dark = 0.0, (0.0, 0.0, 0.0)
            elif sigma is None:
                sigma = calibrate_drift_sigma(self.noise.get("drift_target", DEFAULT_DRIFT_TARGET))
            return NoiseConfig(
                dark_prob=tuple(dark),
                click_prob=self.noise["click_prob"],
                drift_sigma=sigma,
                triggers=self.noise["triggers"],
                seed=self.seed,
            )
        except CalibrationError as e:
            raise ConfigurationError(f"Invalid drift_target: {e}") from e
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid noise parameter: {e}") from e

    def resolved_settings(self) -> List[ProtocolSetting]:
        if self.settings == "recorded":
            return recorded_settings(self.protocol)
        if self.settings == "exhaustive":
            return all_settings(self.protocol)
        try:
            return [ProtocolSetting.from_values(self.protocol, values) for values in self.settings]
        except InvalidInputError as e:
            raise ConfigurationError(f"Invalid setting in config: {e}") from e

    def echo(self) -> Dict[str, Any]:
        """The configuration as written into reports (output path excluded)."""
        noise = self.noise_config()
        return {
            "protocol": self.protocol,
            "settings": self.settings,
            "seed": self.seed,
            "zero_noise": self.zero_noise,
            "noise": {
                "dark_prob": list(noise.dark_prob),
                "click_prob": noise.click_prob,
                "drift_sigma": noise.drift_sigma,
                "triggers": noise.triggers,
            },
        }


class ConfigManager:
    """Loads a campaign config file and merges it with environment and CLI values."""

    CONFIG_FILENAME = ".qutritcomm.toml"
    USER_CONFIG_FILENAME = "config.toml"

    def __init__(self, config_dir=None, user_dir=None):
        """Initialize the config manager.

        Args:
            config_dir: Directory searched for .qutritcomm.toml.
                        Defaults to current working directory.
            user_dir: Per-user config directory. Defaults to the platform one.
        """
        self.logger = logging.getLogger(__name__)
        self._config_dir = Path(config_dir) if config_dir else Path.cwd()
        self._user_dir = Path(user_dir) if user_dir else Path(user_config_dir("qutritcomm"))

    def discover(self, explicit=None) -> Optional[Path]:
        """Find the config file to use.

        Returns:
            Path or None: --config path, then $QUTRITCOMM_CONFIG, then the
            working-directory file, then the per-user file
        """
        if explicit:
            return Path(explicit)
        env_path = os.getenv(CONFIG_ENV_VAR)
        if env_path:
            return Path(env_path)
        for candidate in (
            self._config_dir / self.CONFIG_FILENAME,
            self._user_dir / self.USER_CONFIG_FILENAME,
        ):
            if candidate.exists():
                return candidate
        return None

    def _read_file(self, path: Path) -> Dict[str, Any]:
        if path.suffix == ".json":
            return json.loads(path.read_text(encoding="utf-8"))
        if tomllib is None:
            raise ConfigurationError(
                "TOML parsing unavailable (install tomli for Python < 3.11); use a .json config"
            )
        with open(path, "rb") as f:
            return tomllib.load(f)

    def load_file(self, explicit=None) -> Dict[str, Any]:
        """Load the discovered config file.

        A file named by --config or $QUTRITCOMM_CONFIG must exist and parse;
        an auto-discovered file that fails to parse is logged and ignored.

        Raises:
            ConfigurationError: If a named file is missing or malformed
        """
        named = bool(explicit or os.getenv(CONFIG_ENV_VAR))
        path = self.discover(explicit)
        if path is None:
            return {}
        if named and not path.exists():
            raise ConfigurationError(f"Config file {path} not found")
        try:
            data = self._read_file(path)
        except ConfigurationError:
            raise
        except Exception as e:
            if named:
                raise ConfigurationError(f"Error reading config file {path}: {e}") from e
            self.logger.warning(f"Error reading config file {path}: {e}")
            return {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file {path} must hold a single object")
        self.logger.debug(f"Loaded config from {path}")
        return data

    def resolve_seed(self, cli_seed: Optional[int] = None) -> int:
        """Master seed from the --seed flag, else QUTRITCOMM_SEED, else 0.

        Config files are not read.

        Raises:
            ConfigurationError: If the seed is not a non-negative integer
        """
        if cli_seed is not None:
            return self._as_int("seed", cli_seed, minimum=0)
        env_seed = os.getenv(SEED_ENV_VAR)
        return self._as_int("seed", env_seed, minimum=0) if env_seed else RunConfig().seed

    def resolve(self, cli_overrides: Optional[Dict[str, Any]] = None, config_path=None) -> RunConfig:
        """Merge defaults, environment, config file and CLI overrides.

        Args:
            cli_overrides: Values given on the command line; None entries are ignored.
                Keys are the top-level config keys, the noise keys, and zero_noise.
            config_path: Explicit config file path (--config)

        Returns:
            RunConfig: Validated configuration

        Raises:
            ConfigurationError: On unknown keys, wrong types or invalid values
        """
        config = RunConfig()
        env_seed = os.getenv(SEED_ENV_VAR)
        if env_seed:
            config.seed = self._as_int("seed", env_seed, minimum=0)

        self._apply(config, self.load_file(config_path))

        overrides = {k: v for k, v in (cli_overrides or {}).items() if v is not None}
        config.zero_noise = bool(overrides.pop("zero_noise", False))
        noise_overrides = {k: overrides.pop(k) for k in list(overrides) if k in NOISE_KEYS}
        if noise_overrides:
            overrides["noise"] = noise_overrides
        self._apply(config, overrides)

        config.noise_config()
        return config

    def _apply(self, config: RunConfig, data: Dict[str, Any]) -> None:
        unknown = set(data) - TOP_LEVEL_KEYS
        if unknown:
            raise ConfigurationError(f"Unknown config keys: {', '.join(sorted(unknown))}")

        if "protocol" in data:
            try:
                config.protocol = Protocol.parse(data["protocol"]).value
            except InvalidInputError as e:
                raise ConfigurationError(str(e)) from e
        if "settings" in data:
            config.settings = self._as_settings(data["settings"])
        if "seed" in data:
            config.seed = self._as_int("seed", data["seed"], minimum=0)
        if "format" in data:
            if data["format"] not in FORMATS:
                raise ConfigurationError(f"format must be one of {', '.join(FORMATS)}")
            config.format = data["format"]
        if "out" in data:
            config.out = str(data["out"])
        if "concurrency" in data:
            config.concurrency = self._as_int("concurrency", data["concurrency"], minimum=1)
        if "noise" in data:
            noise = data["noise"]
            if not isinstance(noise, dict):
                raise ConfigurationError("noise must be a table of parameters")
            unknown = set(noise) - NOISE_KEYS
            if unknown:
                raise ConfigurationError(f"Unknown noise keys: {', '.join(sorted(unknown))}")
            if "triggers" in noise:
                noise = {**noise, "triggers": self._as_int("triggers", noise["triggers"], minimum=1)}
            config.noise = {**config.noise, **noise}

    @staticmethod
    def _as_int(name: str, value, minimum: int) -> int:
        try:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            result = int(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"{name} must be an integer, got {value!r}")
        if result < minimum:
            raise ConfigurationError(f"{name} must be at least {minimum}, got {result}")
        return result

    @staticmethod
    def _as_settings(value) -> Union[str, List[List[int]]]:
        if isinstance(value, str):
            if value not in SETTINGS_MODES:
                raise ConfigurationError(f"settings must be one of {SETTINGS_MODES} or a list")
            return value
        if not isinstance(value, list) or not value:
            raise ConfigurationError("settings must be a non-empty list of setting lists")
        if not all(isinstance(row, list) for row in value):
            raise ConfigurationError("each setting must be a list of integers")
        return [list(row) for row in value]
