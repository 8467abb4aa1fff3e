import dataclasses
import logging

from sgtools.errors import ConfigError

logger = logging.getLogger(__name__)


class ConfigSection:
    """Mixin for the dataclass config sections of each feature.

    Sections are built from plain dicts read out of spec (YAML) or schema
    (JSON) files. Unknown keys are an error, not something to ignore.
    """
    section_name = None

    @classmethod
    def from_dict(cls, values):
        values = dict(values or {})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(
                "unknown key(s) {} in config section '{}'".format(
                    ', '.join(unknown), cls.section_name)
            )
        for f in dataclasses.fields(cls):
            if f.name in values and isinstance(values[f.name], list):
                values[f.name] = tuple(values[f.name])
        try:
            section = cls(**values)
        except (TypeError, ValueError) as e:
            raise ConfigError(
                "invalid config section '{}': {}".format(cls.section_name, e))
        section.validate()
        return section

    def to_dict(self):
        values = dataclasses.asdict(self)
        return {key: list(value) if isinstance(value, tuple) else value
                for key, value in values.items()}

    def replace(self, **changes):
        section = dataclasses.replace(self, **changes)
        section.validate()
        return section

    def validate(self):
        pass
