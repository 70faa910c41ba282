"""Small SegNet-style encoder-decoder for two-class pixel labeling.

Three conv+batchnorm+pool encoder blocks mirrored by three
unpool+conv+batchnorm decoder blocks; max-pool indices are carried
across so the decoder restores spatial detail without learned
upsampling.  A 1x1 head maps the last feature map to
background/foreground logits at input resolution.  The batch norms do
the heavy lifting for optimization: they keep the net trainable at the
small SGD learning rate used here.
"""

from __future__ import annotations

import torch
from torch import nn

_CHANNELS = (8, 16, 32)


class ToySegNet(nn.Module):
    """Input (N, 1, H, W) -> logits (N, 2, H, W); H and W must be /8."""

    def __init__(self):
        super().__init__()
        c8, c16, c32 = _CHANNELS
        self.enc = nn.ModuleList([
            nn.Conv2d(1, c8, kernel_size=3, padding=1),
            nn.Conv2d(c8, c16, kernel_size=3, padding=1),
            nn.Conv2d(c16, c32, kernel_size=3, padding=1),
        ])
        self.enc_norm = nn.ModuleList([nn.BatchNorm2d(c) for c in (c8, c16, c32)])
        # unpool indices carry the encoder channel counts, so each decoder
        # conv reduces channels to match the next (shallower) set of indices
        self.dec = nn.ModuleList([
            nn.Conv2d(c32, c16, kernel_size=3, padding=1),
            nn.Conv2d(c16, c8, kernel_size=3, padding=1),
            nn.Conv2d(c8, c8, kernel_size=3, padding=1),
        ])
        self.dec_norm = nn.ModuleList([nn.BatchNorm2d(c) for c in (c16, c8, c8)])
        self.head = nn.Conv2d(_CHANNELS[0], 2, kernel_size=1)
        self.pool = nn.MaxPool2d(2, stride=2, return_indices=True)
        self.unpool = nn.MaxUnpool2d(2, stride=2)
        self.act = nn.ReLU(inplace=True)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] % 8 or x.shape[-2] % 8:
            raise ValueError(f"input height/width must be divisible by 8, got {tuple(x.shape[-2:])}")
        indices = []
        for conv, norm in zip(self.enc, self.enc_norm):
            x, idx = self.pool(self.act(norm(conv(x))))
            indices.append(idx)
        for conv, norm in zip(self.dec, self.dec_norm):
            x = self.act(norm(conv(self.unpool(x, indices.pop()))))
        return self.head(x)

    @torch.no_grad()
    def predict_prob(self, x: torch.Tensor) -> torch.Tensor:
        """Foreground probability map (N, H, W)."""
        return torch.softmax(self.forward(x), dim=1)[:, 1]
