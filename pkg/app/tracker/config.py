"""Online tracking settings."""
import dataclasses
import math


class Error(Exception):
    pass


class InvalidTrackerConfigError(Error):
    pass


@dataclasses.dataclass(frozen=True)
class TrackerConfig:
    # Candidates drawn around the previous result on every frame.
    n_candidates: int = 256
    # Translation std (fraction of the mean box side) and log-scale std of
    # the candidates.
    trans_sigma: float = 0.6
    scale_sigma: float = 0.5 * math.log(1.05)
    # Each consecutive failure widens the translation std by this factor, up
    # to `max_trans_expand` times its base value.
    trans_expand: float = 1.1
    max_trans_expand: float = 1.5
    top_k: int = 5
    # Mean top-k score above which a frame counts as tracked.
    success_threshold: float = 0.0

    # First-frame training samples.
    n_pos_init: int = 500
    n_neg_init: int = 5000
    init_iterations: int = 50
    init_lr: float = 5e-4

    # Bounding-box regressor.
    n_reg: int = 1000
    reg_iou: float = 0.6
    reg_trans_sigma: float = 0.3
    reg_scale_sigma: float = 0.5 * math.log(1.6)
    reg_lambda: float = 1000.0

    # Samples collected on every successful frame.
    n_pos_update: int = 50
    n_neg_update: int = 200
    pos_iou: float = 0.7
    neg_iou_init: float = 0.5
    neg_iou_update: float = 0.3
    pos_trans_sigma: float = 0.1
    pos_scale_sigma: float = 1.2 * math.log(1.05)
    neg_trans_sigma: float = 1.0
    neg_scale_sigma: float = 0.5

    # Updates read samples of the last `short_interval` frames; a long update
    # runs every `long_interval` frames. The memory keeps `long_memory` frames
    # of positives and `short_memory` frames of negatives.
    short_interval: int = 20
    long_interval: int = 10
    long_memory: int = 100
    short_memory: int = 20
    update_iterations: int = 15
    update_lr: float = 1e-3
    # FC6 learns faster than FC4/FC5 by this factor.
    fc6_lr_multiplier: float = 10.0

    batch_pos: int = 32
    batch_neg: int = 96
    batch_neg_candidates: int = 1024
    momentum: float = 0.9
    weight_decay: float = 5e-4
    grad_clip: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.top_k <= self.n_candidates:
            raise InvalidTrackerConfigError(
                'Expected 1 <= top_k <= n_candidates.')
        for name in ('short_interval', 'long_interval', 'long_memory',
                     'short_memory', 'n_pos_init', 'n_neg_init', 'n_reg',
                     'batch_pos', 'batch_neg'):
            if getattr(self, name) < 1:
                raise InvalidTrackerConfigError(f'{name} must be positive.')
        if self.batch_neg_candidates < self.batch_neg:
            raise InvalidTrackerConfigError(
                'batch_neg_candidates must be at least batch_neg.')
        if self.trans_expand < 1 or self.max_trans_expand < 1:
            raise InvalidTrackerConfigError(
                'Search expansion factors must be at least 1.')

    def as_dict(self):
        return dataclasses.asdict(self)
