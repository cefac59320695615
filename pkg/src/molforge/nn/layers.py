"""Network building blocks used by the generator and the scorer.

Everything is float64 on purpose: the models are desk-scale and the
test suite leans on tight numeric tolerances (finite-difference checks
at 1e-4, equivariance at 1e-10), which float32 would not survive.
"""

from __future__ import annotations

import math

import numpy as np

from . import tensor as T
from .tensor import Tensor

LN2 = math.log(2.0)


class Module:
    """Minimal parameter container; submodules discovered by attribute walk."""

    def named_parameters(self, prefix: str = "") -> list[tuple[str, Tensor]]:
        found: list[tuple[str, Tensor]] = []
        for name, value in vars(self).items():
            key = f"{prefix}{name}"
            if isinstance(value, Tensor) and value.requires_grad:
                found.append((key, value))
            elif isinstance(value, Module):
                found.extend(value.named_parameters(f"{key}."))
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        found.extend(item.named_parameters(f"{key}.{i}."))
                    elif isinstance(item, Tensor) and item.requires_grad:
                        found.append((f"{key}.{i}", item))
        return found

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]


def glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> Tensor:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, size=shape), requires_grad=True)


def shifted_softplus(x: Tensor) -> Tensor:
    """ln(0.5 e^x + 0.5); zero at the origin, smooth everywhere."""
    return T.softplus(x) - LN2


class Dense(Module):
    def __init__(self, rng: np.random.Generator, n_in: int, n_out: int, *, zero_init: bool = False):
        if zero_init:
            self.weight = Tensor(np.zeros((n_in, n_out)), requires_grad=True)
        else:
            self.weight = glorot(rng, (n_in, n_out), n_in, n_out)
        self.bias = Tensor(np.zeros(n_out), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return T.matmul(x, self.weight) + self.bias


class Embedding(Module):
    def __init__(self, rng: np.random.Generator, n_vocab: int, dim: int):
        self.weight = glorot(rng, (n_vocab, dim), n_vocab, dim)

    def __call__(self, indices: np.ndarray) -> Tensor:
        return T.gather_rows(self.weight, indices)


def gaussian_rbf(distances: np.ndarray, n_gaussians: int, d_max: float) -> np.ndarray:
    """Expand distances onto Gaussians centered on [0, d_max].

    Width equals the center spacing, so each distance lights up a small
    neighborhood of basis functions and the expansion varies smoothly.
    """
    if n_gaussians < 2:
        raise ValueError("need at least two basis centers")
    centers = np.linspace(0.0, d_max, n_gaussians)
    spacing = centers[1] - centers[0]
    d = np.asarray(distances, dtype=np.float64).reshape(-1, 1)
    return np.exp(-((d - centers) ** 2) / (2.0 * spacing**2))


def cosine_cutoff(distances: np.ndarray, cutoff: float) -> np.ndarray:
    """Smooth mask that reaches exactly zero at the cutoff radius."""
    d = np.asarray(distances, dtype=np.float64)
    mask = 0.5 * (np.cos(np.pi * d / cutoff) + 1.0)
    return np.where(d < cutoff, mask, 0.0)


def pair_list(positions: np.ndarray, cutoff: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All ordered pairs (src, dst) closer than cutoff, with distances."""
    n = positions.shape[0]
    if n < 2:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0, dtype=np.float64)
    deltas = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((deltas**2).sum(axis=-1))
    src, dst = np.nonzero((dist < cutoff) & ~np.eye(n, dtype=bool))
    return src.astype(np.int64), dst.astype(np.int64), dist[src, dst]


class Interaction(Module):
    """Continuous-filter convolution with a residual update.

    The filter is generated from the interatomic distance alone (RBF
    expansion through two dense layers) and modulated by a cosine
    cutoff, so atoms beyond the cutoff contribute exactly nothing.
    """

    def __init__(self, rng: np.random.Generator, dim: int, n_gaussians: int, cutoff: float, d_max: float):
        self.n_gaussians = n_gaussians
        self.cutoff = cutoff
        self.d_max = d_max
        self.filter1 = Dense(rng, n_gaussians, dim)
        self.filter2 = Dense(rng, dim, dim)
        self.in_dense = Dense(rng, dim, dim)
        self.out1 = Dense(rng, dim, dim)
        self.out2 = Dense(rng, dim, dim)

    def __call__(self, feats: Tensor, src: np.ndarray, dst: np.ndarray, distances: np.ndarray) -> Tensor:
        n = feats.shape[0]
        x = self.in_dense(feats)
        if len(src):
            rbf = Tensor(gaussian_rbf(distances, self.n_gaussians, self.d_max))
            cut = Tensor(cosine_cutoff(distances, self.cutoff).reshape(-1, 1))
            filt = self.filter2(shifted_softplus(self.filter1(rbf))) * cut
            messages = T.gather_rows(x, src) * filt
            agg = T.segment_sum(messages, dst, n)
        else:
            agg = x * 0.0
        update = self.out2(shifted_softplus(self.out1(agg)))
        return feats + update


class GraphAttention(Module):
    """Multi-head attention over graph edges, heads concatenated.

    Self-loops are added internally, so an isolated node attends to
    itself with weight one and its output is just its own projection.
    """

    def __init__(self, rng: np.random.Generator, n_in: int, dim: int, heads: int):
        self.heads = heads
        self.dim = dim
        self.proj = [Dense(rng, n_in, dim) for _ in range(heads)]
        self.attn_src = [glorot(rng, (dim, 1), dim, 1) for _ in range(heads)]
        self.attn_dst = [glorot(rng, (dim, 1), dim, 1) for _ in range(heads)]

    @property
    def n_out(self) -> int:
        return self.heads * self.dim

    def __call__(self, feats: Tensor, src: np.ndarray, dst: np.ndarray) -> Tensor:
        n = feats.shape[0]
        loops = np.arange(n, dtype=np.int64)
        src = np.concatenate([np.asarray(src, dtype=np.int64), loops])
        dst = np.concatenate([np.asarray(dst, dtype=np.int64), loops])

        outputs = []
        for h in range(self.heads):
            projected = self.proj[h](feats)
            score_src = T.matmul(projected, self.attn_src[h])
            score_dst = T.matmul(projected, self.attn_dst[h])
            scores = shifted_softplus(T.gather_rows(score_src, src) + T.gather_rows(score_dst, dst))
            alpha = segment_softmax(scores, dst, n)
            weighted = T.gather_rows(projected, src) * alpha
            outputs.append(T.segment_sum(weighted, dst, n))
        return T.concat(outputs, axis=1) if self.heads > 1 else outputs[0]


def segment_softmax(scores: Tensor, segment_ids: np.ndarray, n_segments: int) -> Tensor:
    """Softmax within each segment; scores shaped (m, 1).

    The per-segment max is subtracted as a constant. Softmax and its
    gradient are invariant to a constant shift, so this is exact, and
    it keeps the exponentials bounded.
    """
    segment_ids = np.asarray(segment_ids, dtype=np.int64)
    seg_max = np.full((n_segments, 1), -np.inf)
    np.maximum.at(seg_max, segment_ids, scores.data)
    seg_max[~np.isfinite(seg_max)] = 0.0  # empty segments never indexed below
    shifted = scores - Tensor(seg_max[segment_ids])
    numer = T.exp(shifted)
    denom = T.segment_sum(numer, segment_ids, n_segments)
    return numer / T.gather_rows(denom, segment_ids)
