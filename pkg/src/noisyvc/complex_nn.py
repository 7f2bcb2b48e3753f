"""Complex-valued layers for the spectrum-masking denoiser.

Each layer holds a real and an imaginary sub-module and composes them by
the complex product rule: out_r = f_r(x_r) - f_i(x_i),
out_i = f_r(x_i) + f_i(x_r). Activations and normalization apply to the
real and imaginary parts independently.
"""

from __future__ import annotations

import torch
import torch.nn as nn


class ComplexConv2d(nn.Module):
    def __init__(self, in_channels, out_channels, kernel_size, stride=1, padding=0):
        super().__init__()
        self.re = nn.Conv2d(in_channels, out_channels, kernel_size, stride, padding)
        self.im = nn.Conv2d(in_channels, out_channels, kernel_size, stride, padding)

    def forward(self, xr, xi):
        return self.re(xr) - self.im(xi), self.re(xi) + self.im(xr)


class ComplexConvTranspose2d(nn.Module):
    def __init__(self, in_channels, out_channels, kernel_size, stride=1, padding=0,
                 output_padding=0):
        super().__init__()
        self.re = nn.ConvTranspose2d(in_channels, out_channels, kernel_size, stride,
                                     padding, output_padding)
        self.im = nn.ConvTranspose2d(in_channels, out_channels, kernel_size, stride,
                                     padding, output_padding)

    def forward(self, xr, xi):
        return self.re(xr) - self.im(xi), self.re(xi) + self.im(xr)


class ComplexLSTM(nn.Module):
    def __init__(self, input_size, hidden_size):
        super().__init__()
        self.re = nn.LSTM(input_size, hidden_size, batch_first=True)
        self.im = nn.LSTM(input_size, hidden_size, batch_first=True)

    def forward(self, xr, xi):
        rr, _ = self.re(xr)
        ii, _ = self.im(xi)
        ri, _ = self.re(xi)
        ir, _ = self.im(xr)
        return rr - ii, ri + ir


class ComplexLinear(nn.Module):
    def __init__(self, in_features, out_features):
        super().__init__()
        self.re = nn.Linear(in_features, out_features)
        self.im = nn.Linear(in_features, out_features)

    def forward(self, xr, xi):
        return self.re(xr) - self.im(xi), self.re(xi) + self.im(xr)


class ComplexBatchNorm2d(nn.Module):
    """Part-wise batch norm (separate statistics for real and imaginary)."""

    def __init__(self, channels):
        super().__init__()
        self.re = nn.BatchNorm2d(channels)
        self.im = nn.BatchNorm2d(channels)

    def forward(self, xr, xi):
        return self.re(xr), self.im(xi)


class ComplexPReLU(nn.Module):
    def __init__(self):
        super().__init__()
        self.re = nn.PReLU()
        self.im = nn.PReLU()

    def forward(self, xr, xi):
        return self.re(xr), self.im(xi)
