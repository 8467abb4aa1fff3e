import logging
from dataclasses import dataclass

from sgtools.config import ConfigSection
from sgtools.errors import ConfigError
from sgtools.registration.data import Strategy

logger = logging.getLogger(__name__)

OVERLAP_VARIANTS = ('all', 'top3')
TOP3 = 3

OVERLAP = 'overlap'
NON_OVERLAP = 'non_overlap'

BUCKETS = ('10-30', '30-60', '60+')
OVERALL = 'overall'

HITS_AT = (1, 3, 5)


@dataclass(frozen=True)
class MetricThresholds(ConfigSection):
    """Distances are in meters; tau3 is an inlier ratio."""
    section_name = 'metrics'

    tau1: float = 0.2
    tau2: float = 0.1
    tau3: float = 0.05
    mosaic_dist: float = 0.05
    overlap_mu: float = 0.375
    overlap_mu3: float = 0.45

    def validate(self):
        for name in ('tau1', 'tau2', 'mosaic_dist'):
            if getattr(self, name) <= 0:
                raise ConfigError("{} must be positive, got {}".format(
                    name, getattr(self, name)))
        for name in ('tau3', 'overlap_mu', 'overlap_mu3'):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ConfigError("{} must lie in (0, 1), got {}".format(
                    name, getattr(self, name)))

    def overlap_threshold(self, variant):
        if variant not in OVERLAP_VARIANTS:
            raise ConfigError("unknown overlap variant '{}', expected one of "
                              "{}".format(variant, ', '.join(OVERLAP_VARIANTS)))
        return self.overlap_mu if variant == 'all' else self.overlap_mu3


@dataclass(frozen=True)
class EvaluationConfig(ConfigSection):
    section_name = 'evaluation'

    overlap_variant: str = 'all'
    strategy: str = 'o2o'
    gt_radius: float = 0.05
    use_gt_alignment: bool = False

    def validate(self):
        if self.overlap_variant not in OVERLAP_VARIANTS:
            raise ConfigError("unknown overlap variant '{}'".format(
                self.overlap_variant))
        try:
            Strategy(self.strategy)
        except ValueError:
            raise ConfigError("unknown strategy '{}'".format(self.strategy))
        if self.gt_radius <= 0:
            raise ConfigError("gt_radius must be positive")


def f1_score(precision, recall):
    if precision + recall <= 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)
