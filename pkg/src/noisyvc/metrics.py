"""Objective measures: SI-SNR, SD-SDR, their training losses, and MCD.

The numpy functions are pure metric evaluations capped to +/-60 dB. The
torch losses are the differentiable forms used in training; they share the
same projections but keep only the -60 dB numerical floor, so a perfect
estimate saturates instead of producing an infinite loss.
"""

from __future__ import annotations

import numpy as np
import torch

from .audio import Waveform
from .dsp import CepstralSequence
from .errors import DataError

MCD_CONST = 10.0 / np.log(10.0) * np.sqrt(2.0)


def _zero_mean_pair(estimate: Waveform, reference: Waveform) -> tuple[np.ndarray, np.ndarray]:
    if len(estimate) != len(reference):
        raise DataError("estimate and reference lengths differ")
    est = estimate.samples - estimate.samples.mean()
    ref = reference.samples - reference.samples.mean()
    if not np.any(ref):
        raise DataError("reference has zero power after mean removal")
    return est, ref


def si_snr(estimate: Waveform, reference: Waveform, eps: float = 1e-8, cap: float = 60.0) -> float:
    """Scale-invariant signal-to-noise ratio in dB, capped to [-cap, cap]."""
    est, ref = _zero_mean_pair(estimate, reference)
    alpha = np.dot(est, ref) / np.dot(ref, ref)
    target = alpha * ref
    value = 10.0 * np.log10((np.dot(target, target) + eps) / (np.dot(target - est, target - est) + eps))
    return float(np.clip(value, -cap, cap))


def sd_sdr(estimate: Waveform, reference: Waveform, eps: float = 1e-8, cap: float = 60.0) -> float:
    """Scale-dependent signal-to-distortion ratio in dB, capped to [-cap, cap].

    The error term is the unscaled ``estimate - reference``, so unlike
    si_snr the value degrades when the estimate's power is mismatched.
    """
    est, ref = _zero_mean_pair(estimate, reference)
    alpha = np.dot(est, ref) / np.dot(ref, ref)
    target = alpha * ref
    err = est - ref
    value = 10.0 * np.log10((np.dot(target, target) + eps) / (np.dot(err, err) + eps))
    return float(np.clip(value, -cap, cap))


def sd_sdr_loss(estimate: torch.Tensor, reference: torch.Tensor, eps: float = 1e-8) -> torch.Tensor:
    """Negative SD-SDR over the last axis, floored at -60 (no upper cap).

    Differentiable with respect to ``estimate``; gradients vanish only in
    the floor region where the estimate already matches the reference.
    """
    est = estimate - estimate.mean(dim=-1, keepdim=True)
    ref = reference - reference.mean(dim=-1, keepdim=True)
    alpha = (est * ref).sum(dim=-1, keepdim=True) / ((ref * ref).sum(dim=-1, keepdim=True) + eps)
    target_pow = (alpha * ref).pow(2).sum(dim=-1)
    err_pow = (est - ref).pow(2).sum(dim=-1)
    value = -10.0 * torch.log10((target_pow + eps) / (err_pow + eps))
    return torch.clamp(value, min=-60.0)


def si_snr_loss(estimate: torch.Tensor, reference: torch.Tensor, eps: float = 1e-8) -> torch.Tensor:
    """Negative SI-SNR over the last axis, floored at -60 (no upper cap)."""
    est = estimate - estimate.mean(dim=-1, keepdim=True)
    ref = reference - reference.mean(dim=-1, keepdim=True)
    alpha = (est * ref).sum(dim=-1, keepdim=True) / ((ref * ref).sum(dim=-1, keepdim=True) + eps)
    target = alpha * ref
    target_pow = target.pow(2).sum(dim=-1)
    err_pow = (target - est).pow(2).sum(dim=-1)
    value = -10.0 * torch.log10((target_pow + eps) / (err_pow + eps))
    return torch.clamp(value, min=-60.0)


def dtw_path(cost: np.ndarray) -> list[tuple[int, int]]:
    """Minimum-cost monotone alignment through a pairwise cost matrix.

    Steps are (1,1), (1,0) and (0,1); both endpoints are anchored.
    """
    n, m = cost.shape
    acc = np.full((n, m), np.inf)
    move = np.zeros((n, m), dtype=np.uint8)  # 0=diag 1=up 2=left
    acc[0, 0] = cost[0, 0]
    for j in range(1, m):
        acc[0, j] = acc[0, j - 1] + cost[0, j]
        move[0, j] = 2
    for i in range(1, n):
        acc_prev = acc[i - 1]
        acc_row = acc[i]
        move_row = move[i]
        acc_row[0] = acc_prev[0] + cost[i, 0]
        move_row[0] = 1
        cost_row = cost[i]
        for j in range(1, m):
            diag = acc_prev[j - 1]
            up = acc_prev[j]
            left = acc_row[j - 1]
            best = diag
            step = 0
            if up < best:
                best = up
                step = 1
            if left < best:
                best = left
                step = 2
            acc_row[j] = cost_row[j] + best
            move_row[j] = step
    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while (i, j) != (0, 0):
        step = move[i, j]
        if step == 0:
            i, j = i - 1, j - 1
        elif step == 1:
            i -= 1
        else:
            j -= 1
        path.append((i, j))
    path.reverse()
    return path


def mcd(ref: CepstralSequence, est: CepstralSequence) -> float:
    """Mel cepstral distortion in dB after dynamic time warping.

    Frames are aligned by DTW with Euclidean local cost; the result is the
    mean over aligned pairs of (10/ln10) * sqrt(2 * sum_d (c_d - c'_d)^2).
    c0 must already be excluded from both sequences.
    """
    if ref.includes_c0 or est.includes_c0:
        raise DataError("mcd requires cepstra without c0")
    a, b = ref.frames, est.frames
    if a.shape[0] < 1 or b.shape[0] < 1:
        raise DataError("mcd requires non-empty sequences")
    if a.shape[1] != b.shape[1]:
        raise DataError(f"cepstral orders differ: {a.shape[1]} vs {b.shape[1]}")
    diff = a[:, None, :] - b[None, :, :]
    cost = np.sqrt((diff**2).sum(axis=2))
    path = dtw_path(cost)
    return float(MCD_CONST * np.mean([cost[i, j] for i, j in path]))
