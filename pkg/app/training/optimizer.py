"""Parameter selection and the SGD optimizer used by both training phases."""
import logging

import torch

from model import network

logger = logging.getLogger(__name__)


class Error(Exception):
    pass


class NoTrainableParametersError(Error):
    pass


def build_optimizer(net, groups, config):
    """Freezes everything except `groups` and returns an SGD optimizer.

    Args:
        net: A network.EANet.
        groups: A list of (prefixes, learning_rate) tuples. A parameter joins
            the first group whose prefixes match its name.
        config: A TrainConfig providing momentum and weight decay.

    Raises:
        NoTrainableParametersError: If no parameter matches any group.
    """
    all_prefixes = tuple(p for prefixes, _ in groups for p in prefixes)
    net.set_trainable(all_prefixes)
    param_groups = []
    claimed = set()
    for prefixes, learning_rate in groups:
        params = []
        for name, parameter in net.named_parameters():
            if name in claimed or not name.startswith(tuple(prefixes)):
                continue
            claimed.add(name)
            params.append(parameter)
        if params:
            param_groups.append({'params': params, 'lr': learning_rate})
    if not param_groups:
        raise NoTrainableParametersError(
            f'No parameter matches the prefixes {list(all_prefixes)}.')
    logger.debug('Training %d parameter tensors in %d groups', len(claimed),
                 len(param_groups))
    return torch.optim.SGD(param_groups,
                           lr=param_groups[0]['lr'],
                           momentum=config.momentum,
                           weight_decay=config.weight_decay)


def with_backbone(groups, config):
    """Adds the backbone at the pre-trained learning rate when enabled."""
    if not config.train_backbone:
        return list(groups)
    return list(groups) + [((network.BACKBONE_PREFIX,), config.lr_pretrained)]


def clipped_step(optimizer, loss, grad_clip):
    """Backpropagates `loss`, clips the gradient norm and updates."""
    optimizer.zero_grad()
    loss.backward()
    params = [p for group in optimizer.param_groups for p in group['params']]
    torch.nn.utils.clip_grad_norm_(params, grad_clip)
    optimizer.step()
