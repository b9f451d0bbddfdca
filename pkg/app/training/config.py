"""Offline training settings."""
import dataclasses
import hashlib
import math


class Error(Exception):
    pass


class InvalidTrainConfigError(Error):
    pass


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    phase: int = 1
    epochs: int = 500
    iterations_per_epoch: int = 100
    # Newly introduced layers (fusion modules and the FC stack).
    lr_new: float = 1e-3
    # Layers initialized from pre-trained weights; only used when the
    # backbone is unfrozen.
    lr_pretrained: float = 1e-4
    momentum: float = 0.9
    weight_decay: float = 5e-4
    grad_clip: float = 10.0
    train_backbone: bool = False
    frames_per_batch: int = 8
    pos_per_batch: int = 32
    neg_per_batch: int = 96
    # Negatives drawn per batch before hard negative mining keeps
    # `neg_per_batch` of them.
    neg_candidates: int = 1024
    pos_iou: float = 0.7
    neg_iou: float = 0.5
    pos_sigma_xy: float = 0.1
    pos_sigma_scale: float = math.log(1.05) * 1.2
    neg_sigma_xy: float = 1.0
    neg_sigma_scale: float = 0.5
    seed: int = 0
    log_every: int = 10

    def __post_init__(self):
        if self.phase not in (1, 2):
            raise InvalidTrainConfigError(f'Unknown phase {self.phase}.')
        for name in ('epochs', 'iterations_per_epoch', 'frames_per_batch',
                     'pos_per_batch', 'neg_per_batch', 'neg_candidates',
                     'log_every'):
            if getattr(self, name) < 1:
                raise InvalidTrainConfigError(f'{name} must be positive.')
        for name in ('lr_new', 'lr_pretrained', 'grad_clip'):
            if getattr(self, name) <= 0:
                raise InvalidTrainConfigError(f'{name} must be positive.')
        if self.neg_candidates < self.neg_per_batch:
            raise InvalidTrainConfigError(
                'neg_candidates must be at least neg_per_batch.')
        if not 0.0 <= self.neg_iou <= self.pos_iou <= 1.0:
            raise InvalidTrainConfigError(
                'Expected 0 <= neg_iou <= pos_iou <= 1.')

    @property
    def iterations(self):
        return self.epochs * self.iterations_per_epoch

    def as_dict(self):
        return dataclasses.asdict(self)

    def digest(self):
        """Stable hash of every setting."""
        text = '\n'.join(
            f'{key}={value!r}' for key, value in sorted(self.as_dict().items()))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()


def for_phase(config, phase):
    return dataclasses.replace(config, phase=phase)
