"""U-Net for single-channel occupancy-map segmentation.

Encoder doubles channels 64 -> 128 -> 256 over two 3x3 conv + ReLU blocks
per stage with 2x2 max pooling between, a single 512-channel bottleneck
conv, then three upsample + skip-concatenation stages whose concatenated
widths are 768, 384 and 192, each reduced by one 3x3 conv. A final 1x1
conv with a logistic head yields one probability per input pixel.

Three poolings force the input height and width to be divisible by 8.
"""

from dataclasses import dataclass

import torch
from torch import nn

__all__ = ["NetSpec", "UNet", "build", "POOLINGS"]

POOLINGS = 3


@dataclass(frozen=True)
class NetSpec:
    """Architecture parameters; the defaults are the layout this harness exists to train."""

    in_channels: int = 1
    encoder_channels: tuple = (64, 128, 256)
    bottleneck_channels: int = 512

    @property
    def divisor(self) -> int:
        return 2 ** POOLINGS

    def check_input_size(self, height: int, width: int) -> None:
        if height % self.divisor or width % self.divisor:
            raise ValueError(
                f"input {height}x{width} not divisible by {self.divisor}; "
                f"{POOLINGS} pooling stages require it")


def _double_conv(cin: int, cout: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(cin, cout, kernel_size=3, padding=1),
        nn.ReLU(inplace=True),
        nn.Conv2d(cout, cout, kernel_size=3, padding=1),
        nn.ReLU(inplace=True),
    )


class UNet(nn.Module):
    def __init__(self, spec: NetSpec | None = None):
        super().__init__()
        self.spec = spec or NetSpec()
        c1, c2, c3 = self.spec.encoder_channels
        cb = self.spec.bottleneck_channels

        self.enc1 = _double_conv(self.spec.in_channels, c1)
        self.enc2 = _double_conv(c1, c2)
        self.enc3 = _double_conv(c2, c3)
        self.pool = nn.MaxPool2d(2)
        self.bottleneck = nn.Sequential(
            nn.Conv2d(c3, cb, kernel_size=3, padding=1),
            nn.ReLU(inplace=True),
        )
        self.up = nn.Upsample(scale_factor=2, mode="nearest")
        self.dec3 = nn.Sequential(
            nn.Conv2d(cb + c3, c3, kernel_size=3, padding=1),
            nn.ReLU(inplace=True),
        )
        self.dec2 = nn.Sequential(
            nn.Conv2d(c3 + c2, c2, kernel_size=3, padding=1),
            nn.ReLU(inplace=True),
        )
        self.dec1 = nn.Sequential(
            nn.Conv2d(c2 + c1, c1, kernel_size=3, padding=1),
            nn.ReLU(inplace=True),
        )
        self.head = nn.Conv2d(c1, 1, kernel_size=1)

    def forward_logits(self, x: torch.Tensor) -> torch.Tensor:
        """Pre-sigmoid scores; training losses use these for stable
        gradients. The public output stays logistic."""
        self.spec.check_input_size(x.shape[-2], x.shape[-1])
        s1 = self.enc1(x)                      # (64, H, W)
        s2 = self.enc2(self.pool(s1))          # (128, H/2, W/2)
        s3 = self.enc3(self.pool(s2))          # (256, H/4, W/4)
        b = self.bottleneck(self.pool(s3))     # (512, H/8, W/8)
        d3 = self.dec3(torch.cat([self.up(b), s3], dim=1))    # 768 -> 256
        d2 = self.dec2(torch.cat([self.up(d3), s2], dim=1))   # 384 -> 128
        d1 = self.dec1(torch.cat([self.up(d2), s1], dim=1))   # 192 -> 64
        return self.head(d1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.forward_logits(x))

    def stage_shapes(self, height: int, width: int) -> dict:
        """Expected (channels, H, W) per named stage, for conformance checks."""
        c1, c2, c3 = self.spec.encoder_channels
        cb = self.spec.bottleneck_channels
        return {
            "enc1": (c1, height, width),
            "enc2": (c2, height // 2, width // 2),
            "enc3": (c3, height // 4, width // 4),
            "bottleneck": (cb, height // 8, width // 8),
            "concat3": (cb + c3, height // 4, width // 4),
            "dec3": (c3, height // 4, width // 4),
            "concat2": (c3 + c2, height // 2, width // 2),
            "dec2": (c2, height // 2, width // 2),
            "concat1": (c2 + c1, height, width),
            "dec1": (c1, height, width),
            "output": (1, height, width),
        }


def build(spec: NetSpec | None = None) -> UNet:
    return UNet(spec)
