"""Module to load the the settings from SHOME/.spikeesn/configuration.ini file

Will fall back to a default. Run settings are resolved in layers: packaged
template, user configuration file, run configuration file, key=value overrides.
"""

import logging
import os
import shutil
from configparser import ConfigParser, Error as ConfigParserError
from pathlib import Path
from typing import Callable, Iterable, Optional

from spikeesn.esn.errors import ConfigError, DataError
from spikeesn.esn.model_settings import MODES
from spikeesn.esn.pipeline import AdaptationPolicy, EncoderConfig, ModelConfig
from spikeesn.esn.reservoir import ReservoirConfig

logger = logging.getLogger("spikeesn")

# configuration settings file path
CONFIG_PATH_FILE = os.path.join(Path.home(), ".spikeesn", "configuration.ini")
# packaged template
TEMPLATE_FILE = os.path.join(Path(__file__).resolve().parent, "configuration_template.ini")


def _steps(text: str) -> tuple[int, ...]:
    return tuple(int(item) for item in text.replace(" ", "").split(",") if item)


def _mode(text: str) -> str:
    if text not in MODES:
        raise ValueError(f"expected one of {MODES}")
    return text


# sections a run configuration may set, with the parser of every key
RUN_FIELDS: dict[str, dict[str, Callable[[str], object]]] = {
    "encoder": dict(n_sam=int, psi=float),
    "reservoir": dict(n_res=int, rho=float, eta=float, input_scale=float),
    "readout": dict(mu=float),
    "pipeline": dict(washout=int, steps=_steps, mode=_mode, train_fraction=float),
    "adaptation": dict(state_low=float, state_high=float, psi_step=float, max_rounds=int),
}


class Configuration:
    """Load and validate Configuration Data"""

    def __init__(self):
        """Initialization of configuration mechanism"""
        # capture the current state
        self.valid = False

        # locate the template configuration file
        self.template_file_path = TEMPLATE_FILE

        # retrieve the file path of the file
        self.config_file_path = CONFIG_PATH_FILE
        logger.info(f"{self.config_file_path} will be used")

        # if template conf file path exists
        if os.path.exists(self.template_file_path):
            # file does not exist create it from template
            if not os.path.exists(self.config_file_path):
                # if directory structure does not exist create it
                if not os.path.exists(os.path.dirname(self.config_file_path)):
                    os.makedirs(os.path.dirname(self.config_file_path))
                shutil.copy2(self.template_file_path, self.config_file_path)

            self.config = ConfigParser(allow_no_value=True, comment_prefixes="/")
            # parse the file
            try:
                self.config.read(self.config_file_path)
                # validate the file has the all the latest variables
                self.validate()
            except (ValueError, ConfigParserError) as err:
                logger.error(str(err))
                logger.error(f"Problem with the file: {self.config_file_path}")
        else:
            logger.error(f"Template configuration file: {self.template_file_path} is missing!")

    def validate(self):
        """Validates that the fields exist at the config_file_path and writes any missing fields/data
        using the template configuration file: configuration_template.ini as a guide
        """
        template_config = ConfigParser(allow_no_value=True, comment_prefixes="/")
        template_config.read(self.template_file_path)
        for section in template_config.sections():
            # if section is missing
            if section not in self.config.sections():
                # copy the whole section
                self.config.add_section(section)

            for item in template_config.items(section):
                field, _ = item
                if field not in self.config[section]:
                    # copy the field
                    self.config[section][field] = template_config[section][field]
        with open(self.config_file_path, "w", encoding="utf8") as config_file:
            self.config.write(config_file)
        self.valid = True

    def is_valid(self):
        """Returns the configuration state"""
        return self.valid

    def run_settings(self) -> dict[str, dict[str, str]]:
        """Return the raw model sections of the user configuration"""
        return {
            section: {key: value for key, value in self.config[section].items() if not key.startswith("#")}
            for section in RUN_FIELDS
            if section in self.config
        }


def get_data(section, name=None):
    """Retrieves the configuration data for a variable with name"""
    # default file path location
    config_file_path = CONFIG_PATH_FILE
    if os.path.exists(config_file_path):
        config = ConfigParser()
        # parse the file
        config.read(config_file_path)
        try:
            if name:
                value = config[section][name]
                # in case of boolean string value cast it to bool
                if value in ("True", "False"):
                    return value == "True"
                # in case of None
                if value == "None":
                    return None
                return value
            return config[section]
        except KeyError as err:
            # requested section/field do not exist
            logger.error(str(err))
            return None
    return None


def _read_template() -> dict[str, dict[str, str]]:
    template = ConfigParser()
    template.read(TEMPLATE_FILE)
    return {section: dict(template[section]) for section in RUN_FIELDS}


def _merge(raw: dict[str, dict[str, str]], section: str, key: str, value: str, source: str) -> None:
    if section not in RUN_FIELDS:
        raise ConfigError(f"{section}.{key}" if key else section, f"unknown section in {source}")
    if key not in RUN_FIELDS[section]:
        raise ConfigError(f"{section}.{key}", f"unknown key in {source}")
    raw[section][key] = value


def parse_override(text: str) -> tuple[str, str, str]:
    """Split ``section.key=value``"""
    path, separator, value = text.partition("=")
    section, dot, key = path.strip().partition(".")
    if not separator or not dot or not key:
        raise ConfigError(path.strip() or text, "overrides must look like section.key=value")
    return section, key, value.strip()


def resolve_run_config(
    config_path: Optional[str] = None, overrides: Iterable[str] = (), user_settings: Optional[dict] = None
) -> tuple[ModelConfig, AdaptationPolicy]:
    """Build the model configuration and adaptation policy of a run

    Args:
        config_path: optional INI file with sections encoder, reservoir, readout, pipeline, adaptation
        overrides: ``section.key=value`` strings applied last
        user_settings: raw sections of the user configuration file

    """
    raw = _read_template()
    for section, values in (user_settings or {}).items():
        for key, value in values.items():
            _merge(raw, section, key, value, CONFIG_PATH_FILE)

    if config_path is not None:
        if not os.path.exists(config_path):
            raise ConfigError("config", f"file not found: {config_path}")
        run_file = ConfigParser()
        try:
            run_file.read(config_path, encoding="utf8")
        except ConfigParserError as err:
            raise ConfigError("config", f"cannot parse {config_path}: {err}") from None
        for section in run_file.sections():
            if section not in RUN_FIELDS:
                raise ConfigError(section, f"unknown section in {config_path}")
            for key, value in run_file[section].items():
                _merge(raw, section, key, value, config_path)

    for text in overrides:
        section, key, value = parse_override(text)
        _merge(raw, section, key, value, "overrides")

    typed: dict[str, dict[str, object]] = {}
    for section, parsers in RUN_FIELDS.items():
        typed[section] = {}
        for key, parser in parsers.items():
            try:
                typed[section][key] = parser(raw[section][key])
            except (TypeError, ValueError) as err:
                raise ConfigError(f"{section}.{key}", f"invalid value {raw[section][key]!r}: {err}") from None

    try:
        encoder = EncoderConfig(**typed["encoder"])
        reservoir = ReservoirConfig(**typed["reservoir"])
    except DataError as err:
        raise _field_error(err) from None
    if typed["readout"]["mu"] < 0:
        raise ConfigError("readout.mu", f"must be non-negative, got {typed['readout']['mu']}")
    try:
        model_config = ModelConfig(encoder=encoder, reservoir=reservoir, mu=typed["readout"]["mu"], **typed["pipeline"])
        policy = AdaptationPolicy(**typed["adaptation"])
    except DataError as err:
        raise _field_error(err) from None
    return model_config, policy


def _field_error(err: DataError) -> ConfigError:
    """Attach the key path named at the start of a validation message"""
    field = str(err).split(" ", 1)[0]
    for section, parsers in RUN_FIELDS.items():
        if field in parsers:
            return ConfigError(f"{section}.{field}", str(err))
    return ConfigError("config", str(err))
