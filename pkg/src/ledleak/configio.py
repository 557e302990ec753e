"""Layered INI configuration: bundled defaults plus optional user overrides."""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError

_BUNDLED = "defaults.cfg"


@dataclass(frozen=True)
class Config:
    """Read-only view over a parsed config with typed accessors."""

    _parser: configparser.ConfigParser

    def sections(self) -> list[str]:
        return list(self._parser.sections())

    def has(self, section: str, key: str) -> bool:
        return self._parser.has_option(section, key)

    def _raw(self, section: str, key: str) -> str:
        try:
            return self._parser.get(section, key)
        except (configparser.NoSectionError, configparser.NoOptionError) as exc:
            raise ConfigError(f"missing config value [{section}] {key}") from exc

    def text(self, section: str, key: str, fallback: str | None = None) -> str:
        if fallback is not None and not self.has(section, key):
            return fallback
        return self._raw(section, key).strip()

    def number(self, section: str, key: str, fallback: float | None = None) -> float:
        if fallback is not None and not self.has(section, key):
            return fallback
        raw = self._raw(section, key)
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(
                f"bad numeric value [{section}] {key} = {raw!r}"
            ) from exc

    def flag(self, section: str, key: str, fallback: bool | None = None) -> bool:
        if fallback is not None and not self.has(section, key):
            return fallback
        raw = self._raw(section, key).strip().lower()
        if raw in ("1", "true", "yes", "on"):
            return True
        if raw in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"bad boolean value [{section}] {key} = {raw!r}")

    def pairs(self, section: str, key: str) -> tuple[tuple[float, float], ...]:
        """Parse a comma list of colon pairs, e.g. ``2:1e-8, 3:5e-9``."""
        raw = self._raw(section, key).strip()
        if not raw:
            return ()
        out = []
        for item in raw.split(","):
            item = item.strip()
            if not item:
                continue
            try:
                left, right = item.split(":")
                out.append((float(left), float(right)))
            except ValueError as exc:
                raise ConfigError(
                    f"bad pair {item!r} in [{section}] {key}"
                ) from exc
        return tuple(out)


def _new_parser() -> configparser.ConfigParser:
    # interpolation off: values contain bare '%'-free numerics only, but a
    # user file should never be able to trip interpolation syntax errors
    return configparser.ConfigParser(interpolation=None, strict=True)


def defaults() -> Config:
    """The bundled default configuration."""
    parser = _new_parser()
    data = resources.files(__package__).joinpath("data", _BUNDLED).read_text()
    parser.read_string(data, source=_BUNDLED)
    return Config(parser)


def load_config(path: str | None = None) -> Config:
    """Bundled defaults overlaid with the user file at ``path`` (if given)."""
    parser = _new_parser()
    data = resources.files(__package__).joinpath("data", _BUNDLED).read_text()
    parser.read_string(data, source=_BUNDLED)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as handle:
                parser.read_file(handle, source=path)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    return Config(parser)
