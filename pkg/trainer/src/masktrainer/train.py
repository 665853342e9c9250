"""Training loop: full-batch Adam over per-scenario sequences."""

from dataclasses import dataclass, field

import numpy as np
import torch

from .model import MaskEstimator, training_loss


@dataclass
class TrainResult:
    model: MaskEstimator
    losses: list = field(default_factory=list)

    @property
    def loss_drop(self):
        return self.losses[0] / self.losses[-1] if self.losses else float("nan")


def _to_batches(scenarios, mean, std, device):
    """Group equal-length scenarios into (B, L, F) tensors."""
    by_length = {}
    for s in scenarios:
        normalized = (s.features - mean) / std
        by_length.setdefault(s.features.shape[0], []).append(
            (normalized, s.mask, s.power)
        )
    batches = []
    for triples in by_length.values():
        feats, masks, powers = (np.stack(t) for t in zip(*triples))
        batches.append(tuple(
            torch.tensor(a, dtype=torch.float32, device=device)
            for a in (feats, masks, powers)
        ))
    return batches


def train(scenarios, mean, std, hidden_dim=512, num_layers=2, epochs=50,
          learning_rate=2e-3, seed=0, device="cpu", log_every=0):
    """Train a mask estimator on pre-extracted scenario tensors.

    Returns a TrainResult with the per-epoch loss history (mean weighted
    squared error over all cells of all scenarios).
    """
    torch.manual_seed(seed)
    input_dim = scenarios[0].features.shape[1]
    output_dim = scenarios[0].mask.shape[1]
    model = MaskEstimator(input_dim, hidden_dim, num_layers, output_dim)
    model.to(device)
    batches = _to_batches(scenarios, mean, std, device)
    optimizer = torch.optim.Adam(model.parameters(), lr=learning_rate)

    losses = []
    for epoch in range(epochs):
        model.train()
        total = 0.0
        cells = 0
        for feats, masks, powers in batches:
            optimizer.zero_grad()
            estimate = model(feats)
            loss = training_loss(masks, estimate, powers)
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * masks.numel()
            cells += masks.numel()
        losses.append(total / cells)
        if log_every and (epoch + 1) % log_every == 0:
            print(f"epoch {epoch + 1:4d}  loss {losses[-1]:.6e}")
    model.eval()
    return TrainResult(model=model, losses=losses)
