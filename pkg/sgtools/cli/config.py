import logging
from dataclasses import dataclass, field, replace

from sgtools.cli.file import read_config_file
from sgtools.encoder.data import EncoderConfig
from sgtools.errors import ConfigError
from sgtools.matcher.data import MatcherConfig
from sgtools.metrics.data import EvaluationConfig, MetricThresholds
from sgtools.registration.data import RegistrationConfig
from sgtools.scenegraph.data import GenerateConfig, GeneratorConfig
from sgtools.training.data import TrainingConfig

logger = logging.getLogger(__name__)

SECTIONS = {
    'generator': GeneratorConfig,
    'encoder': EncoderConfig,
    'matcher': MatcherConfig,
    'registration': RegistrationConfig,
    'metrics': MetricThresholds,
    'training': TrainingConfig,
    'generate': GenerateConfig,
    'evaluation': EvaluationConfig
}


@dataclass(frozen=True)
class RunConfig:
    """Every config section of one command invocation."""
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    registration: RegistrationConfig = field(
        default_factory=RegistrationConfig)
    metrics: MetricThresholds = field(default_factory=MetricThresholds)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    generate: GenerateConfig = field(default_factory=GenerateConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)

    @classmethod
    def from_dict(cls, document):
        document = document or {}
        unknown = sorted(set(document) - set(SECTIONS))
        if unknown:
            raise ConfigError("unknown config section(s): {}".format(
                ', '.join(unknown)))
        config = cls(**{name: section.from_dict(document.get(name))
                        for name, section in SECTIONS.items()})
        config.validate()
        return config

    @classmethod
    def load(cls, file_path=None):
        if file_path is None:
            return cls.from_dict({})
        logger.debug("reading config from {}".format(file_path))
        return cls.from_dict(read_config_file(file_path))

    def to_dict(self):
        return {name: getattr(self, name).to_dict() for name in SECTIONS}

    def validate(self):
        for name in SECTIONS:
            getattr(self, name).validate()
        if self.encoder.n_classes != self.generator.n_classes or \
                self.encoder.n_relations != self.generator.n_relations:
            raise ConfigError(
                "encoder vocabulary ({}, {}) differs from the generator's "
                "({}, {})".format(self.encoder.n_classes,
                                  self.encoder.n_relations,
                                  self.generator.n_classes,
                                  self.generator.n_relations))

    def with_overrides(self, seed=None, gamma=None, strategy=None,
                       estimator=None, overlap_variant=None):
        """Applies command-line flags on top of the file sections."""
        config = self
        if seed is not None:
            config = replace(
                config,
                generate=config.generate.replace(seed=seed),
                training=config.training.replace(seed=seed),
                registration=config.registration.replace(seed=seed))
        if gamma is not None:
            config = replace(config, registration=config.registration.replace(
                gamma=gamma))
        if strategy is not None:
            config = replace(
                config,
                registration=config.registration.replace(strategy=strategy),
                evaluation=config.evaluation.replace(strategy=strategy))
        if estimator is not None:
            config = replace(config, registration=config.registration.replace(
                estimator=estimator))
        if overlap_variant is not None:
            config = replace(config, evaluation=config.evaluation.replace(
                overlap_variant=overlap_variant))
        config.validate()
        return config
