import logging
from dataclasses import dataclass, field
from typing import List, Optional

from sgtools.config import ConfigSection
from sgtools.errors import ConfigError

logger = logging.getLogger(__name__)

MATCHING_LOSS_EPS = 1e-12
LOSS_CURVE_HEADER = ('epoch', 'L_s', 'L_k', 'L')


@dataclass(frozen=True)
class TrainingConfig(ConfigSection):
    section_name = 'training'

    epochs: int = 10
    learning_rate: float = 1e-4
    lr_decay: float = 0.1
    decay_every: int = 4
    batch_size: int = 4
    alpha: float = 10.0
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def validate(self):
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be >= 0")
        if self.batch_size < 1 or self.decay_every < 1:
            raise ConfigError("batch_size and decay_every must be >= 1")
        if self.alpha < 0:
            raise ConfigError("alpha must be >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("Adam betas must lie in [0, 1)")

    def learning_rate_at(self, epoch):
        """Step decay: multiplied by lr_decay every decay_every epochs."""
        return self.learning_rate * self.lr_decay ** (epoch // self.decay_every)


@dataclass(frozen=True)
class LossReport:
    matching: float
    similarity: float
    total: float
    alpha: float = 10.0


@dataclass
class TrainingState:
    """Everything needed to resume: next epoch, loss curve, optimizer."""
    epoch: int = 0
    loss_curve: List[tuple] = field(default_factory=list)
    optimizer: Optional[object] = None
