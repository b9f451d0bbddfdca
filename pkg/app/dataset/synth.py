"""Generates synthetic RGBT sequences with exact ground truth.

A textured square moves over a smooth, structured background. In the thermal
channel the background is cool and the target is hot. Scripted frame ranges
add occlusion, low illumination and thermal crossover; a non-zero scale rate
grows or shrinks the target. The attribute flags follow from the script.
"""
import dataclasses
import logging
import math

import cv2
import numpy as np

from dataset import attributes as attributes_lib
from dataset import sequence as sequence_lib

logger = logging.getLogger(__name__)

_A = attributes_lib.EvalAttributeId

# Fraction of the mean target side above which a per-frame displacement
# counts as fast motion.
_FAST_MOTION_RATIO = 0.25

_TARGET_TEMPERATURE = 215.0
_OCCLUDER_TEMPERATURE = 45.0
_OCCLUDER_COLOR = (95.0, 95.0, 105.0)


class Error(Exception):
    pass


class InvalidSynthSpecError(Error):
    pass


@dataclasses.dataclass(frozen=True)
class SynthSpec:
    name: str = 'synth'
    frames: int = 20
    # (width, height) of the frames.
    frame_size: tuple = (160, 120)
    # (width, height) of the target on the first frame.
    target_size: tuple = (28, 28)
    # Top-left corner of the target on the first frame.
    start: tuple = (40, 40)
    # Displacement in pixels per frame; the target bounces off the borders.
    velocity: tuple = (2, 1)
    # Relative size change per frame, e.g. 0.02 grows the target by 2%.
    scale_rate: float = 0.0
    # Inclusive (first, last) frame ranges; empty tuples disable them.
    occlusion: tuple = ()
    # Fraction of the target width covered during occlusion.
    occlusion_fraction: float = 1.0
    low_illumination: tuple = ()
    illumination_gain: float = 0.3
    thermal_crossover: tuple = ()
    # Standard deviation of the per-frame sensor noise.
    noise: float = 3.0
    # Extra flags to attach, e.g. background clutter.
    extra_attributes: frozenset = frozenset()
    seed: int = 0

    def __post_init__(self):
        width, height = self.frame_size
        target_w, target_h = self.target_size
        if self.frames < 1:
            raise InvalidSynthSpecError('frames must be positive.')
        if target_w < 4 or target_h < 4:
            raise InvalidSynthSpecError('The target must be at least 4x4.')
        if target_w > width or target_h > height:
            raise InvalidSynthSpecError('The target must fit in the frame.')
        if not 0.0 < self.occlusion_fraction <= 1.0:
            raise InvalidSynthSpecError(
                'occlusion_fraction must lie in (0, 1].')
        for frame_range in (self.occlusion, self.low_illumination,
                            self.thermal_crossover):
            if frame_range and (len(frame_range) != 2 or
                                frame_range[0] > frame_range[1]):
                raise InvalidSynthSpecError(
                    f'Invalid frame range {frame_range}.')

    def flags(self):
        flags = set(self.extra_attributes)
        if self.occlusion:
            flags.add(_A.HEAVY_OCCLUSION if self.occlusion_fraction >= 0.5
                      else _A.PARTIAL_OCCLUSION)
        else:
            flags.add(_A.NO_OCCLUSION)
        if self.low_illumination:
            flags.add(_A.LOW_ILLUMINATION)
        if self.thermal_crossover:
            flags.add(_A.THERMAL_CROSSOVER)
        if self.scale_rate != 0:
            flags.add(_A.SCALE_VARIATION)
        side = (self.target_size[0] + self.target_size[1]) / 2.0
        if math.hypot(*self.velocity) > _FAST_MOTION_RATIO * side:
            flags.add(_A.FAST_MOTION)
        return frozenset(flags)


def _in_range(index, frame_range):
    return bool(frame_range) and frame_range[0] <= index <= frame_range[1]


def _bounce(position, limit):
    if limit <= 0:
        return 0
    period = 2 * limit
    offset = position % period
    return offset if offset <= limit else period - offset


def trajectory(spec):
    """Integer (x, y, w, h) boxes of the target on every frame."""
    width, height = spec.frame_size
    boxes = np.zeros((spec.frames, 4), dtype=np.float64)
    for t in range(spec.frames):
        factor = (1.0 + spec.scale_rate)**t
        w = int(np.clip(round(spec.target_size[0] * factor), 4, width))
        h = int(np.clip(round(spec.target_size[1] * factor), 4, height))
        # The target grows around the center of its unscaled position.
        raw_x = (spec.start[0] + spec.velocity[0] * t +
                 (spec.target_size[0] - w) / 2.0)
        raw_y = (spec.start[1] + spec.velocity[1] * t +
                 (spec.target_size[1] - h) / 2.0)
        x = _bounce(int(round(raw_x)), width - w)
        y = _bounce(int(round(raw_y)), height - h)
        boxes[t] = (x, y, w, h)
    return boxes


def _smooth_noise(rng, size, channels, low, high, cell=16):
    width, height = size
    grid = rng.uniform(low, high,
                       (height // cell + 2, width // cell + 2, channels))
    return cv2.resize(grid.astype(np.float32), (width, height),
                      interpolation=cv2.INTER_CUBIC).reshape(
                          height, width, channels).astype(np.float64)


def _checkerboard(rng, size, cells=4):
    colors = rng.uniform(0, 255, (cells, cells, 3))
    return cv2.resize(colors.astype(np.float32),
                      size,
                      interpolation=cv2.INTER_NEAREST).astype(np.float64)


def synth_sequence(spec, seed=None):
    """Renders the sequence described by `spec`.

    Args:
        spec: A SynthSpec.
        seed: Overrides `spec.seed` when given.

    Returns:
        An in-memory sequence.Sequence.
    """
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    width, height = spec.frame_size
    rgb_background = _smooth_noise(rng, spec.frame_size, 3, 30, 225)
    tir_background = _smooth_noise(rng, spec.frame_size, 1, 40, 100)[:, :, 0]
    texture = _checkerboard(rng, tuple(spec.target_size))
    heat = _TARGET_TEMPERATURE + rng.uniform(-12, 12, (4, 4))
    boxes = trajectory(spec)

    rgb_frames, tir_frames = [], []
    for t, (x, y, w, h) in enumerate(boxes.astype(int)):
        rgb = rgb_background.copy()
        tir = tir_background.copy()
        rgb[y:y + h, x:x + w] = cv2.resize(texture.astype(np.float32),
                                           (w, h),
                                           interpolation=cv2.INTER_NEAREST)
        if _in_range(t, spec.thermal_crossover):
            # Same temperature as the surroundings: invisible in TIR.
            tir[y:y + h, x:x + w] = tir_background[y:y + h, x:x + w]
        else:
            tir[y:y + h, x:x + w] = cv2.resize(heat.astype(np.float32),
                                               (w, h),
                                               interpolation=cv2.INTER_NEAREST)
        if _in_range(t, spec.occlusion):
            covered = max(1, int(round(w * spec.occlusion_fraction)))
            rgb[y:y + h, x:x + covered] = _OCCLUDER_COLOR
            tir[y:y + h, x:x + covered] = _OCCLUDER_TEMPERATURE
        if _in_range(t, spec.low_illumination):
            rgb *= spec.illumination_gain
        rgb += rng.normal(0.0, spec.noise, rgb.shape)
        tir += rng.normal(0.0, spec.noise, tir.shape)
        rgb_frames.append(np.clip(np.rint(rgb), 0, 255).astype(np.uint8))
        tir_frames.append(np.clip(np.rint(tir), 0, 255).astype(np.uint8))

    frame_attributes = {}
    for attribute, frame_range in (
        (_A.HEAVY_OCCLUSION if spec.occlusion_fraction >= 0.5 else
         _A.PARTIAL_OCCLUSION, spec.occlusion),
        (_A.LOW_ILLUMINATION, spec.low_illumination),
        (_A.THERMAL_CROSSOVER, spec.thermal_crossover),
    ):
        if frame_range:
            frame_attributes[attribute] = [
                _in_range(t, frame_range) for t in range(spec.frames)
            ]
    logger.debug('Rendered synthetic sequence %s with %d frames', spec.name,
                 spec.frames)
    return sequence_lib.from_arrays(spec.name,
                                    rgb_frames,
                                    tir_frames,
                                    boxes,
                                    attributes=spec.flags(),
                                    frame_attributes=frame_attributes)


def scenario_specs(count, seed=0, frames=20):
    """A varied set of specs that together cover the five branch attributes.

    Sequence i uses seed `seed + i` and cycles through: plain motion,
    occlusion, low illumination, scale change, thermal crossover and fast
    motion.
    """
    specs = []
    for i in range(count):
        base = SynthSpec(name=f'synth-{i:03d}', frames=frames, seed=seed + i)
        third = max(1, frames // 3)
        scenario = i % 6
        if scenario == 1:
            base = dataclasses.replace(base,
                                       occlusion=(third, third + 2),
                                       occlusion_fraction=0.6)
        elif scenario == 2:
            base = dataclasses.replace(base,
                                       low_illumination=(third, frames - 1))
        elif scenario == 3:
            base = dataclasses.replace(base, scale_rate=0.02)
        elif scenario == 4:
            base = dataclasses.replace(base,
                                       thermal_crossover=(third, 2 * third))
        elif scenario == 5:
            base = dataclasses.replace(base, velocity=(8, 3))
        specs.append(base)
    return specs
