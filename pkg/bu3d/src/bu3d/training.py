"""Training loop, staged L1 loss, and checkpoint I/O."""

import dataclasses

import numpy as np
import torch

from .network import BU3DNet, StageConfig

CHECKPOINT_VERSION = 1


@dataclasses.dataclass
class TrainConfig:
    epochs: int = 200
    lr: float = 3e-3
    aux_weight: float = 0.5
    batch_size: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def staged_l1_loss(stage_depths, truth, aux_weight=0.5):
    """L1 between the final squeezed depth and truth, plus aux_weight-scaled
    L1 on each intermediate stage's squeezed depth."""
    loss = (stage_depths[-1] - truth).abs().mean()
    for x in stage_depths[:-1]:
        loss = loss + aux_weight * (x - truth).abs().mean()
    return loss


def _validate_dataset(dataset, config):
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    r = config.sr_factor
    for i, (d, truth) in enumerate(dataset):
        d = np.asarray(d)
        truth = np.asarray(truth)
        if d.ndim != 3 or d.shape[0] != config.n_scales:
            raise ValueError(f"sample {i}: expected ({config.n_scales}, H, W) "
                             f"depths, got {d.shape}")
        if truth.shape != (r * d.shape[1], r * d.shape[2]):
            raise ValueError(f"sample {i}: truth shape {truth.shape} does not "
                             f"match depths {d.shape} at factor {r}")


def train(model: BU3DNet, dataset, config: TrainConfig | None = None,
          log=None):
    """Optimize the network on (multiscale depths, truth) pairs.

    dataset: sequence of ((L, H, W) array, (rH, rW) array).  Samples are
    grouped by shape into minibatches.  Returns the list of mean per-epoch
    losses; `log`, if given, is called with one line per epoch.
    """
    if config is None:
        config = TrainConfig()
    _validate_dataset(dataset, model.config)
    pairs = [(torch.as_tensor(np.asarray(d), dtype=torch.float32),
              torch.as_tensor(np.asarray(t), dtype=torch.float32))
             for d, t in dataset]
    by_shape = {}
    for d, t in pairs:
        by_shape.setdefault(tuple(d.shape), []).append((d, t))

    rng = np.random.default_rng(config.seed)
    torch.manual_seed(config.seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    model.train()
    history = []
    for epoch in range(config.epochs):
        batches = []
        for group in by_shape.values():
            order = rng.permutation(len(group))
            for lo in range(0, len(group), config.batch_size):
                chunk = [group[i] for i in order[lo:lo + config.batch_size]]
                batches.append((torch.stack([d for d, _ in chunk]),
                                torch.stack([t for _, t in chunk])))
        rng.shuffle(batches)
        total, seen = 0.0, 0
        for d_batch, t_batch in batches:
            optimizer.zero_grad()
            _, stage_x, _ = model(d_batch, hard=False)
            loss = staged_l1_loss(stage_x, t_batch, config.aux_weight)
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * len(d_batch)
            seen += len(d_batch)
        history.append(total / seen)
        if log is not None:
            log(f"epoch {epoch + 1:4d}/{config.epochs}  "
                f"loss {history[-1]:.6f}")
    model.eval()
    return history


def save_checkpoint(path, model: BU3DNet):
    torch.save({
        "format_version": CHECKPOINT_VERSION,
        "stage_config": dataclasses.asdict(model.config),
        "state_dict": model.state_dict(),
    }, path)


def load_checkpoint(path) -> BU3DNet:
    data = torch.load(path, map_location="cpu", weights_only=True)
    version = data.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"checkpoint format_version: expected "
                         f"{CHECKPOINT_VERSION}, got {version}")
    model = BU3DNet(StageConfig(**data["stage_config"]))
    model.load_state_dict(data["state_dict"])
    model.eval()
    return model
