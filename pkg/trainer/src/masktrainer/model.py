"""The mask estimator: stacked unidirectional GRU plus a sigmoid head.

torch's GRU gate layout (reset | update | candidate along the packed 3H axis)
is exactly the layout the weights container declares, so export is a plain
tensor copy with no reordering.
"""

import torch
from torch import nn


class MaskEstimator(nn.Module):
    def __init__(self, input_dim=514, hidden_dim=512, num_layers=2, output_dim=257):
        super().__init__()
        self.gru = nn.GRU(input_dim, hidden_dim, num_layers=num_layers,
                          batch_first=True)
        self.head = nn.Linear(hidden_dim, output_dim)

    def forward(self, features):
        """(B, L, input_dim) normalized features -> (B, L, output_dim) masks."""
        hidden, _ = self.gru(features)
        return torch.sigmoid(self.head(hidden))


def weighted_mask_loss(target, estimate, power):
    """Sum over cells of ((target - estimate) * power)^2.

    This is the quantity the inference engine defines; training minimizes its
    per-cell mean, which differs only by a constant factor.
    """
    return torch.sum(((target - estimate) * power) ** 2)


def training_loss(target, estimate, power):
    return torch.mean(((target - estimate) * power) ** 2)
