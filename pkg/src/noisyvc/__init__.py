"""Noisy-to-noisy voice conversion toolkit.

Separates noisy speech into speech and noise in the time domain with a
complex-spectrum masking denoiser, then converts speaker identity with a
VQ-VAE whose autoregressive decoder can be conditioned on the separated
noise, preserving background sounds in the converted output.
"""

__version__ = "0.1.0"
