"""Online tracking-by-detection with the fused two-stream network.

The tracker is initialized on the first frame: it trains a fresh FC6 layer
(and fine-tunes FC4/FC5) on samples around the given box and fits a box
regressor. On every following frame it scores Gaussian candidates around
the previous result, picks the best ones and refines them. Positive and
negative samples of successful frames feed periodic long-term updates;
failures trigger short-term updates. Only the FC layers ever change online.
"""
import dataclasses
import enum
import logging
import time

import numpy as np
import torch

from geometry import box as box_lib
from geometry import regressor
from geometry import sampling
from model import head as head_lib
from model import network
from model import patch
from tracker import memory as memory_lib
from training import checkpoint as checkpoint_lib
from training import optimizer as optimizer_lib

logger = logging.getLogger(__name__)

_MIN_TARGET_SIDE = 2

_SHARED_FC_PREFIXES = ('head.fc4.', 'head.fc5.')
_FC6_PREFIXES = ('head.fc6.',)


class Error(Exception):
    pass


class DegenerateTargetError(Error):
    pass


class TargetOutsideFrameError(Error):
    pass


class UnannotatedFirstFrameError(Error):
    pass


class UpdateKind(enum.Enum):
    SHORT = 'short'
    LONG = 'long'

    def __str__(self):
        return str(self.value)


@dataclasses.dataclass(frozen=True)
class FrameRecord:
    index: int
    box: box_lib.BoundingBox
    # Mean positive score of the top-k candidates.
    score: float
    success: bool
    # Candidate with the highest score, and the top-k candidates best first.
    argmax_index: int
    top_indices: tuple
    # Raw candidate scores, kept for analysis.
    scores: np.ndarray = dataclasses.field(repr=False, compare=False)
    update: UpdateKind = None


@dataclasses.dataclass
class TrackerState:
    # Number of frames processed so far, the first frame included.
    t: int
    current_box: box_lib.BoundingBox
    net: network.EANet
    optimizer: torch.optim.Optimizer
    regressor: regressor.RegressorParams
    memory: memory_lib.SampleMemory
    config: object
    rng: np.random.Generator
    last_score: float = float('inf')
    # Consecutive failed frames; widens the candidate search.
    failures: int = 0
    records: list = dataclasses.field(default_factory=list)


@dataclasses.dataclass
class TrackResult:
    name: str
    boxes: np.ndarray
    records: list
    seconds: float

    @property
    def fps(self):
        return len(self.boxes) / self.seconds if self.seconds > 0 else 0.0


def _sample_spec(n, trans_sigma, scale_sigma, rng):
    return sampling.SampleSpec(n=n,
                               sigma_xy=trans_sigma,
                               sigma_scale=scale_sigma,
                               seed=int(rng.integers(2**31)))


def extract_features(net, frame, boxes, chunk=network.DEFAULT_CHUNK):
    """Fused conv3 features of `boxes` in `frame`, one row per box."""
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    if not len(boxes):
        return torch.zeros((0, net.spec.feature_dim))
    parts = []
    for start in range(0, len(boxes), chunk):
        rows = boxes[start:start + chunk]
        parts.append(
            net.features_in_chunks(patch.extract_patches(frame.rgb, rows),
                                   patch.extract_patches(frame.tir, rows),
                                   chunk=chunk))
    return torch.cat(parts)


def positive_scores(net, features):
    """f+ of every feature row, with dropout disabled."""
    net.head.eval()
    with torch.no_grad():
        return net.head(features, 0)[:, 1]


def _fc_optimizer(net, config, learning_rate):
    return optimizer_lib.build_optimizer(
        net, [(_SHARED_FC_PREFIXES, learning_rate),
              (_FC6_PREFIXES, learning_rate * config.fc6_lr_multiplier)],
        config)


def fine_tune(net, optimizer, pos_features, neg_features, iterations, config,
              rng):
    """Trains the FC layers on stored features.

    Every iteration draws `batch_pos` positives and `batch_neg_candidates`
    negatives and keeps the `batch_neg` hardest negatives.

    Returns:
        The loss of the last iteration, or None without iterations.
    """
    head = net.head
    loss = None
    for _ in range(iterations):
        pos_index = rng.choice(len(pos_features),
                               size=config.batch_pos,
                               replace=len(pos_features) < config.batch_pos)
        neg_index = rng.choice(
            len(neg_features),
            size=config.batch_neg_candidates,
            replace=len(neg_features) < config.batch_neg_candidates)
        negatives = neg_features[torch.from_numpy(neg_index)]
        hardest = head_lib.hard_negative_mining(
            positive_scores(net, negatives), config.batch_neg)
        negatives = negatives[torch.from_numpy(hardest)]
        head.train()
        loss = head_lib.split_loss(
            head(pos_features[torch.from_numpy(pos_index)], 0),
            head(negatives, 0))
        optimizer_lib.clipped_step(optimizer, loss, config.grad_clip)
    head.eval()
    return None if loss is None else float(loss.item())


def _check_target(gt, image_bounds):
    if gt.w < _MIN_TARGET_SIDE or gt.h < _MIN_TARGET_SIDE:
        raise DegenerateTargetError(
            f'Target {gt} is smaller than {_MIN_TARGET_SIDE} pixels.')
    width, height = image_bounds
    if (gt.x >= width or gt.y >= height or gt.x + gt.w <= 0 or
            gt.y + gt.h <= 0):
        raise TargetOutsideFrameError(
            f'Target {gt} lies outside the {width}x{height} frame.')


def _collect(net, frame, target, config, rng, n_pos, n_neg, neg_iou):
    pos_boxes = sampling.sample_by_iou_array(
        target, n_pos, config.pos_iou, 1.0,
        _sample_spec(n_pos, config.pos_trans_sigma, config.pos_scale_sigma,
                     rng), frame.image_bounds)
    neg_boxes = sampling.sample_by_iou_array(
        target, n_neg, 0.0, neg_iou,
        _sample_spec(n_neg, config.neg_trans_sigma, config.neg_scale_sigma,
                     rng), frame.image_bounds)
    return (extract_features(net, frame, pos_boxes),
            extract_features(net, frame, neg_boxes))


def init(frame, gt, model, config):
    """Sets up a tracker on the first frame.

    Args:
        frame: The first dataset.sequence.FramePair.
        gt: The target's BoundingBox on that frame.
        model: An offline training.checkpoint.Checkpoint.
        config: A TrackerConfig.

    Returns:
        A TrackerState with t == 1.

    Raises:
        DegenerateTargetError: If the box is narrower than two pixels.
        TargetOutsideFrameError: If the box does not overlap the frame.
    """
    _check_target(gt, frame.image_bounds)
    rng = np.random.default_rng(config.seed)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(config.seed)
        net = checkpoint_lib.to_network(model, domains=1)
        net.head.reset_domains(1)
        net.eval()

        pos_features, neg_features = _collect(net, frame, gt, config, rng,
                                              config.n_pos_init,
                                              config.n_neg_init,
                                              config.neg_iou_init)
        loss = fine_tune(net, _fc_optimizer(net, config, config.init_lr),
                         pos_features, neg_features, config.init_iterations,
                         config, rng)

        reg_boxes = sampling.sample_by_iou_array(
            gt, config.n_reg, config.reg_iou, 1.0,
            _sample_spec(config.n_reg, config.reg_trans_sigma,
                         config.reg_scale_sigma, rng), frame.image_bounds)
        reg_params = regressor.regressor_fit(
            extract_features(net, frame, reg_boxes).double().numpy(),
            reg_boxes, np.tile(gt.as_array(), (len(reg_boxes), 1)),
            config.reg_lambda)

    store = memory_lib.SampleMemory(config.long_memory, config.short_memory)
    store.add(frame.index, pos_features[:config.n_pos_update],
              neg_features[:config.n_neg_update])
    logger.debug('Initialized tracker on %s, loss %s', gt, loss)
    return TrackerState(t=1,
                        current_box=gt,
                        net=net,
                        optimizer=_fc_optimizer(net, config, config.update_lr),
                        regressor=reg_params,
                        memory=store,
                        config=config,
                        rng=rng)


def top_candidates(scores, top_k):
    """Returns (argmax index, top-k indices best first) of candidate scores.

    Ties go to the lower index in both.
    """
    scores = np.asarray(scores, dtype=np.float64)
    return int(np.argmax(scores)), tuple(
        int(i) for i in head_lib.hard_negative_mining(scores, top_k))


def step(state, frame):
    """Tracks the target into `frame`.

    Returns:
        A tuple (BoundingBox, score).
    """
    config = state.config
    index = state.t
    expand = min(config.trans_expand**state.failures, config.max_trans_expand)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(int(state.rng.integers(2**31)))
        candidates = sampling.gaussian_sample_array(
            state.current_box,
            _sample_spec(config.n_candidates, config.trans_sigma * expand,
                         config.scale_sigma, state.rng), frame.image_bounds)
        features = extract_features(state.net, frame, candidates)
        scores = positive_scores(state.net, features).double().numpy()
        argmax_index, top_indices = top_candidates(scores, config.top_k)
        top = list(top_indices)
        score = float(scores[top].mean())
        success = score > config.success_threshold

        if success:
            refined = regressor.regressor_apply_array(
                state.regressor, features[top].double().numpy(),
                candidates[top])
            result = box_lib.from_array(
                box_lib.clip_array(refined, frame.image_bounds).mean(axis=0))
            state.failures = 0
        else:
            result = box_lib.from_array(candidates[top].mean(axis=0))
            state.failures += 1
        state.current_box = result
        state.last_score = score

        if success:
            pos_features, neg_features = _collect(state.net, frame, result,
                                                  config, state.rng,
                                                  config.n_pos_update,
                                                  config.n_neg_update,
                                                  config.neg_iou_update)
            state.memory.add(frame.index, pos_features, neg_features)

        kind = None
        if not success:
            kind = UpdateKind.SHORT
        elif index % config.long_interval == 0:
            kind = UpdateKind.LONG
        if kind is not None:
            update(state, kind)

    state.t += 1
    state.records.append(
        FrameRecord(index=frame.index,
                    box=result,
                    score=score,
                    success=success,
                    argmax_index=argmax_index,
                    top_indices=top_indices,
                    scores=scores,
                    update=kind))
    logger.debug('Frame %d: %s score %.3f%s', frame.index, result, score,
                 f' ({kind} update)' if kind else '')
    return result, score


def update(state, kind):
    """Fine-tunes the FC layers on the sample memory.

    A short update uses the positives and negatives of the last
    `short_interval` frames; a long update uses every stored positive and the
    recent negatives.
    """
    config = state.config
    kind = UpdateKind(kind)
    if state.memory.is_empty():
        return state
    if kind == UpdateKind.SHORT:
        positives = state.memory.positives(last=config.short_interval)
    else:
        positives = state.memory.positives()
    negatives = state.memory.negatives(last=config.short_interval)
    fine_tune(state.net, state.optimizer, positives, negatives,
              config.update_iterations, config, state.rng)
    return state


def track_sequence(sequence, model, config):
    """Runs one-pass tracking over a whole sequence.

    The tracker starts from the first frame's ground truth, which is also
    the reported box of that frame.

    Returns:
        A TrackResult.
    """
    gt = sequence.gt_box(0)
    if gt is None:
        raise UnannotatedFirstFrameError(
            f'Sequence {sequence.name} has no ground truth on frame 1.')
    started = time.perf_counter()
    state = init(sequence.frame(0), gt, model, config)
    boxes = [gt.as_array()]
    for index in range(1, len(sequence)):
        result, _ = step(state, sequence.frame(index))
        boxes.append(result.as_array())
    outcome = TrackResult(name=sequence.name,
                          boxes=np.stack(boxes),
                          records=state.records,
                          seconds=time.perf_counter() - started)
    failures = sum(1 for record in state.records if not record.success)
    logger.info('Tracked %s: %d frames, %d failures, %.1f fps', sequence.name,
                len(sequence), failures, outcome.fps)
    return outcome
