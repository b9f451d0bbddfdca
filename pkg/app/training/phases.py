"""The two offline training phases.

Phase 1 trains one attribute branch (on every level) together with the FC
stack on the sequences that carry the attribute, with one FC6 domain per
sequence. The backbone stays at its initialization.

Phase 2 takes the five phase-1 branches, freezes them, and trains the
aggregation modules and a fresh FC stack on all sequences. The stored
artifact drops the FC6 bank.
"""
import dataclasses
import logging

import numpy as np
import torch

from dataset import attributes as attributes_lib
from model import architecture
from model import fusion
from model import head as head_lib
from model import network
from model import weights
from training import checkpoint as checkpoint_lib
from training import minibatch
from training import optimizer as optimizer_lib

logger = logging.getLogger(__name__)


class Error(Exception):
    pass


class EmptyDataError(Error):
    pass


class AttributeMismatchError(Error):
    pass


class MissingBranchCheckpointError(Error):
    pass


class IncompatibleCheckpointError(Error):
    pass


def sequences_for_attribute(sequences, attribute):
    """Sequences whose evaluation flags qualify them for `attribute`."""
    flags = attributes_lib.BRANCH_FLAGS[str(fusion.AttributeId(attribute))]
    return [s for s in sequences if s.attributes & flags]


def domain_schedule(domains, iterations, rng):
    """Visits every domain once per cycle, in a fresh random order."""
    order = []
    while len(order) < iterations:
        order.extend(int(d) for d in rng.permutation(domains))
    return order[:iterations]


def _score_fn(net, domain, attribute):

    def score(rgb, tir):
        was_training = net.training
        net.eval()
        with torch.no_grad():
            scores = []
            for start in range(0, len(rgb), network.DEFAULT_CHUNK):
                logits = net(rgb[start:start + network.DEFAULT_CHUNK],
                             tir[start:start + network.DEFAULT_CHUNK],
                             domain, attribute)
                scores.append(logits[:, 1])
        net.train(was_training)
        return torch.cat(scores)

    return score


def _split_logits(logits, batch):
    """Splits minibatch logits into the positive and the negative rows."""
    count = len(batch.rgb_pos)
    return logits[:count], logits[count:]


def _train(net, groups, sequences, config, attribute, rng, on_iteration):
    optimizer = optimizer_lib.build_optimizer(net, groups, config)
    schedule = domain_schedule(len(sequences), config.iterations, rng)
    mine = config.neg_candidates > config.neg_per_batch
    net.train()
    losses = []
    for iteration, domain in enumerate(schedule):
        batch = minibatch.make_minibatch(
            sequences[domain], domain, config, rng,
            _score_fn(net, domain, attribute) if mine else None)
        logits = net(batch.rgb, batch.tir, domain, attribute)
        loss = head_lib.bce_loss(logits, batch.labels)
        optimizer_lib.clipped_step(optimizer, loss, config.grad_clip)
        value = float(loss.item())
        losses.append(value)
        if on_iteration is not None:
            on_iteration(iteration, value)
        if (iteration + 1) % config.log_every == 0:
            pos_logits, neg_logits = _split_logits(logits.detach(), batch)
            logger.info(
                'Iteration %d/%d, domain %s, loss %.4f, accuracy %.3f, '
                'precision %.3f', iteration + 1, config.iterations,
                sequences[domain].name,
                float(np.mean(losses[-config.log_every:])),
                head_lib.accuracy(pos_logits, neg_logits),
                head_lib.precision(pos_logits, neg_logits))
    net.eval()
    return losses


def _metadata(config, phase, domains, losses, **extra):
    metadata = {
        'phase': phase,
        'epochs': config.epochs,
        'iterations': config.iterations,
        'seed': config.seed,
        'config_hash': config.digest(),
        'domains': domains,
        'final_loss': round(float(losses[-1]), 6) if losses else None,
    }
    metadata.update(extra)
    return metadata


def train_phase1(attribute,
                 sequences,
                 config,
                 spec=None,
                 pretrained=None,
                 on_iteration=None):
    """Trains the branches of one attribute.

    Args:
        attribute: A fusion.AttributeId (or its code).
        sequences: Sequences carrying the attribute.
        config: A TrainConfig.
        spec: The architecture.NetworkSpec to build.
        pretrained: Optional path of a backbone weight file.
        on_iteration: Optional callable (iteration, loss).

    Returns:
        A training.checkpoint.Checkpoint including the FC6 bank.

    Raises:
        EmptyDataError: If `sequences` is empty.
        AttributeMismatchError: If a sequence lacks the attribute.
    """
    attribute = fusion.AttributeId(attribute)
    sequences = list(sequences)
    if not sequences:
        raise EmptyDataError(f'No training sequences for {attribute}.')
    tagged = {s.name for s in sequences_for_attribute(sequences, attribute)}
    untagged = [s.name for s in sequences if s.name not in tagged]
    if untagged:
        raise AttributeMismatchError(
            f'Sequences without the {attribute} attribute: {untagged}')

    logger.info('Phase 1 for %s on %d sequences', attribute, len(sequences))
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(config.seed)
        net = network.EANet(spec, domains=len(sequences), seed=config.seed)
        if pretrained:
            weights.load_into(net.backbone, weights.read(pretrained))
        groups = optimizer_lib.with_backbone(
            [(network.branch_prefix(attribute) + network.FC_PREFIXES,
              config.lr_new)], config)
        losses = _train(net, groups, sequences, config, attribute,
                        np.random.default_rng(config.seed), on_iteration)
    return checkpoint_lib.from_network(
        net,
        _metadata(config,
                  1,
                  len(sequences),
                  losses,
                  attribute=str(attribute),
                  sequences=[s.name for s in sequences]))


def assemble(branch_checkpoints, spec=None, domains=1, seed=0):
    """Builds a network from the five phase-1 checkpoints.

    The backbone comes from the first attribute's checkpoint; every branch
    comes from its own attribute's checkpoint. Aggregation and FC layers are
    freshly initialized from `seed`.

    Args:
        branch_checkpoints: A dict from fusion.AttributeId to Checkpoint.
        spec: Optional NetworkSpec overriding the checkpoints' one, e.g. to
            switch the aggregation variant. Branch shapes must agree.
        domains: Size of the FC6 bank.
        seed: Initialization seed.
    """
    branch_checkpoints = {
        fusion.AttributeId(a): c for a, c in branch_checkpoints.items()
    }
    missing = [str(a) for a in fusion.AttributeId if a not in branch_checkpoints]
    if missing:
        raise MissingBranchCheckpointError(
            f'Missing phase-1 checkpoints for: {missing}')
    first = branch_checkpoints[list(fusion.AttributeId)[0]]
    spec = spec or first.spec
    net = network.EANet(spec, domains=domains, seed=seed)
    state = net.state_dict()
    updates = first.subset((network.BACKBONE_PREFIX,))
    for attribute, source in branch_checkpoints.items():
        if source.spec.widths != spec.widths:
            raise IncompatibleCheckpointError(
                f'The {attribute} checkpoint has widths {source.spec.widths}, '
                f'expected {spec.widths}.')
        updates.update(source.subset(network.branch_prefix(attribute)))
    for name, array in updates.items():
        if name not in state or tuple(state[name].shape) != array.shape:
            raise IncompatibleCheckpointError(
                f'Parameter {name} does not fit the network.')
        state[name] = torch.from_numpy(array.copy())
    net.load_state_dict(state)
    return net


def train_phase2(sequences,
                 branch_checkpoints,
                 config,
                 variant=None,
                 sum_reduction=None,
                 on_iteration=None):
    """Trains the aggregation modules and the FC stack.

    Args:
        sequences: All training sequences.
        branch_checkpoints: A dict from fusion.AttributeId to the phase-1
            Checkpoint of that attribute.
        config: A TrainConfig.
        variant: Optional architecture.Variant for the aggregation.
        sum_reduction: Optional architecture.SumReduction of the sum
            variant.
        on_iteration: Optional callable (iteration, loss).

    Returns:
        A Checkpoint without the FC6 bank.
    """
    sequences = list(sequences)
    if not sequences:
        raise EmptyDataError('No training sequences for phase 2.')
    spec = None
    changes = {}
    if variant is not None:
        changes['variant'] = architecture.Variant(variant)
    if sum_reduction is not None:
        changes['sum_reduction'] = architecture.SumReduction(sum_reduction)
    if changes:
        first = next(iter(branch_checkpoints.values()), None)
        if first is None:
            raise MissingBranchCheckpointError('No phase-1 checkpoints.')
        spec = dataclasses.replace(first.spec, **changes)
    logger.info('Phase 2 on %d sequences', len(sequences))
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(config.seed)
        net = assemble(branch_checkpoints,
                       spec,
                       domains=len(sequences),
                       seed=config.seed)
        groups = optimizer_lib.with_backbone(
            [(network.aggregation_prefixes() + network.FC_PREFIXES,
              config.lr_new)], config)
        losses = _train(net, groups, sequences, config, None,
                        np.random.default_rng(config.seed), on_iteration)
    return checkpoint_lib.from_network(net,
                                       _metadata(config,
                                                 2,
                                                 0,
                                                 losses,
                                                 fc6_domains=len(sequences),
                                                 variant=str(net.spec.variant)),
                                       include_domains=False)
