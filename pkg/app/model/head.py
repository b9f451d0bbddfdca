"""Multi-domain fully connected classifier.

FC4 and FC5 are shared; FC6 is a bank with one binary classifier per
training domain (sequence). The positive logit of a sample is its score f+.
"""
import numpy as np
import torch
from torch import nn
import torch.nn.functional as F


class Error(Exception):
    pass


class DomainOutOfRangeError(Error):
    pass


class InvalidLabelError(Error):
    pass


class TooFewScoresError(Error):
    pass


def _new_domain_layer(width):
    layer = nn.Linear(width, 2)
    nn.init.normal_(layer.weight, 0, 0.01)
    nn.init.constant_(layer.bias, 0)
    return layer


class Head(nn.Module):

    def __init__(self, in_features, width=512, domains=1, dropout=0.5):
        super().__init__()
        self.fc4 = nn.Linear(in_features, width)
        self.fc5 = nn.Linear(width, width)
        self.dropout = nn.Dropout(dropout)
        self.fc6 = nn.ModuleList(
            [_new_domain_layer(width) for _ in range(domains)])

    @property
    def domains(self):
        return len(self.fc6)

    def reset_domains(self, count):
        """Replaces the FC6 bank with `count` freshly initialized layers."""
        width = self.fc5.out_features
        self.fc6 = nn.ModuleList(
            [_new_domain_layer(width) for _ in range(count)])

    def shared(self, features):
        hidden = self.dropout(F.relu(self.fc4(features)))
        return self.dropout(F.relu(self.fc5(hidden)))

    def forward(self, features, domain=0):
        """Maps (N, in_features) features to (N, 2) logits of `domain`."""
        if not 0 <= domain < self.domains:
            raise DomainOutOfRangeError(
                f'Domain {domain} is outside [0, {self.domains}).')
        return self.fc6[domain](self.shared(features))


def flatten_features(rgb_feat, tir_feat):
    """Concatenates the flattened conv3 maps of both modalities."""
    return torch.cat(
        [rgb_feat.flatten(start_dim=1),
         tir_feat.flatten(start_dim=1)], dim=1)


def head_forward(rgb_feat, tir_feat, head, domain=0):
    """Returns (score_pos, score_neg) logits for a batch of conv3 features."""
    logits = head(flatten_features(rgb_feat, tir_feat), domain)
    return logits[:, 1], logits[:, 0]


def bce_loss(logits, labels):
    """Mean softmax cross-entropy of (N, 2) logits against 0/1 labels."""
    labels = torch.as_tensor(labels, dtype=torch.long)
    if labels.numel() < 1:
        raise InvalidLabelError('The batch must not be empty.')
    if not bool(((labels == 0) | (labels == 1)).all()):
        raise InvalidLabelError('Labels must be 0 or 1.')
    return F.cross_entropy(logits, labels.to(logits.device))


def split_loss(pos_logits, neg_logits):
    """Loss over a positive set and a negative set, averaged over both."""
    logits = torch.cat([pos_logits, neg_logits], dim=0)
    labels = torch.cat([
        torch.ones(len(pos_logits), dtype=torch.long),
        torch.zeros(len(neg_logits), dtype=torch.long)
    ])
    return bce_loss(logits, labels)


def accuracy(pos_logits, neg_logits):
    pos_correct = (pos_logits[:, 1] > pos_logits[:, 0]).sum().item()
    neg_correct = (neg_logits[:, 1] < neg_logits[:, 0]).sum().item()
    return (pos_correct + neg_correct) / max(
        len(pos_logits) + len(neg_logits), 1)


def precision(pos_logits, neg_logits):
    """Fraction of positives among the len(pos) highest-scoring samples."""
    scores = torch.cat([pos_logits[:, 1], neg_logits[:, 1]])
    top = torch.topk(scores, len(pos_logits)).indices
    return (top < len(pos_logits)).float().mean().item()


def hard_negative_mining(neg_scores, k):
    """Indices of the k highest-scoring negatives, best first.

    Ties are broken by the lower index.

    Raises:
        TooFewScoresError: If k exceeds the number of scores.
    """
    scores = np.asarray(
        neg_scores.detach().cpu().numpy()
        if isinstance(neg_scores, torch.Tensor) else neg_scores,
        dtype=np.float64).reshape(-1)
    if k > len(scores):
        raise TooFewScoresError(
            f'Cannot select {k} negatives out of {len(scores)}.')
    return np.argsort(-scores, kind='stable')[:k]
