"""Minibatch streams with exact composition and no-repeat-within-pass sampling.

All streams are stateful iterators: one consumer each, deterministic given
their ordering seed, and infinite (sources reshuffle independently at their
own exhaustion). Epoch boundaries are bookkeeping for the training loops;
`batches_per_epoch` is how many batches one pass of the shortest source
supports.
"""

from __future__ import annotations

import numpy as np

from ..seeding import derive_seed
from .corpus import Corpus


class _Cursor:
    """Shuffled pass over item indices; never repeats until exhausted.

    When fewer than `k` items remain in the current pass, the remainder is
    topped up from a fresh reshuffle, so batch sizes stay exact.
    """

    def __init__(self, n_items: int, seed: int):
        if n_items <= 0:
            raise ValueError("cursor needs a non-empty corpus")
        self.n = n_items
        self.rng = np.random.default_rng(seed)
        self.order = self.rng.permutation(self.n)
        self.pos = 0

    def take(self, k: int) -> np.ndarray:
        out = []
        while k > 0:
            available = self.n - self.pos
            grab = min(k, available)
            out.append(self.order[self.pos:self.pos + grab])
            self.pos += grab
            k -= grab
            if self.pos == self.n:
                self.order = self.rng.permutation(self.n)
                self.pos = 0
        return np.concatenate(out)

    def state_dict(self) -> dict:
        return {
            "rng": self.rng.bit_generator.state,
            "order": self.order.tolist(),
            "pos": self.pos,
        }

    def load_state_dict(self, state: dict):
        self.rng.bit_generator.state = state["rng"]
        self.order = np.asarray(state["order"], dtype=np.int64)
        self.pos = int(state["pos"])


class SingleBatchStream:
    """Batches from one corpus. composition == 'single_source'."""

    composition = "single_source"

    def __init__(self, corpus: Corpus, batch_size: int, ordering_seed: int):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if len(corpus) == 0:
            raise ValueError("corpus is empty")
        self.corpus = corpus
        self.batch_size = batch_size
        self.ordering_seed = ordering_seed
        self._cursor = _Cursor(len(corpus), derive_seed(ordering_seed, "single"))

    @property
    def batches_per_epoch(self) -> int:
        return max(1, len(self.corpus) // self.batch_size)

    def next_batch(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Returns (images, labels, source_tags); tags are all 0."""
        idx = self._cursor.take(self.batch_size)
        return (
            self.corpus.images[idx],
            self.corpus.labels[idx],
            np.zeros(self.batch_size, dtype=np.int8),
        )

    def state_dict(self) -> dict:
        return {"cursor": self._cursor.state_dict()}

    def load_state_dict(self, state: dict):
        self._cursor.load_state_dict(state["cursor"])


class MixedBatchStream:
    """Batches composed of exactly b/2 items from each of two corpora.

    The downstream retraining protocol trains on half original, half
    generator-translated items per batch; tags record the side each item
    came from (0 = corpus_a, 1 = corpus_b).
    """

    composition = "mixed_half_half"

    def __init__(self, corpus_a: Corpus, corpus_b: Corpus, batch_size: int,
                 ordering_seed: int, strict: bool = True):
        if batch_size % 2 != 0:
            raise ValueError(f"mixed_half_half needs an even batch size, got {batch_size}")
        if len(corpus_a) == 0 or len(corpus_b) == 0:
            raise ValueError("both corpora must be non-empty")
        half = batch_size // 2
        shortest = min(len(corpus_a), len(corpus_b))
        if strict and half > shortest:
            raise ValueError(
                f"batch size {batch_size} needs {half} items per side but the "
                f"shorter corpus has only {shortest} (strict mode)"
            )
        self.corpus_a = corpus_a
        self.corpus_b = corpus_b
        self.batch_size = batch_size
        self.ordering_seed = ordering_seed
        self._cursor_a = _Cursor(len(corpus_a), derive_seed(ordering_seed, "mixed.a"))
        self._cursor_b = _Cursor(len(corpus_b), derive_seed(ordering_seed, "mixed.b"))

    @property
    def batches_per_epoch(self) -> int:
        shortest = min(len(self.corpus_a), len(self.corpus_b))
        return max(1, shortest // (self.batch_size // 2))

    def next_batch(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Returns (images, labels, source_tags), a-half first then b-half."""
        half = self.batch_size // 2
        ia = self._cursor_a.take(half)
        ib = self._cursor_b.take(half)
        images = np.concatenate([self.corpus_a.images[ia], self.corpus_b.images[ib]])
        labels = np.concatenate([self.corpus_a.labels[ia], self.corpus_b.labels[ib]])
        tags = np.concatenate([np.zeros(half, np.int8), np.ones(half, np.int8)])
        return images, labels, tags

    def state_dict(self) -> dict:
        return {"cursor_a": self._cursor_a.state_dict(), "cursor_b": self._cursor_b.state_dict()}

    def load_state_dict(self, state: dict):
        self._cursor_a.load_state_dict(state["cursor_a"])
        self._cursor_b.load_state_dict(state["cursor_b"])


class PairedDomainStream:
    """(real batch, simulated batch) pairs for adversarial training.

    Sides shuffle independently; labels travel with their images.
    """

    composition = "single_source"

    def __init__(self, d_real: Corpus, d_sim: Corpus, batch_size: int, ordering_seed: int):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if len(d_real) == 0 or len(d_sim) == 0:
            raise ValueError("both corpora must be non-empty")
        self.d_real = d_real
        self.d_sim = d_sim
        self.batch_size = batch_size
        self.ordering_seed = ordering_seed
        self._cursor_r = _Cursor(len(d_real), derive_seed(ordering_seed, "paired.real"))
        self._cursor_s = _Cursor(len(d_sim), derive_seed(ordering_seed, "paired.sim"))

    @property
    def batches_per_epoch(self) -> int:
        return max(1, min(len(self.d_real), len(self.d_sim)) // self.batch_size)

    def next_batch(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Returns (real_images, real_labels, sim_images, sim_labels)."""
        ir = self._cursor_r.take(self.batch_size)
        is_ = self._cursor_s.take(self.batch_size)
        return (
            self.d_real.images[ir],
            self.d_real.labels[ir],
            self.d_sim.images[is_],
            self.d_sim.labels[is_],
        )

    def state_dict(self) -> dict:
        return {"cursor_r": self._cursor_r.state_dict(), "cursor_s": self._cursor_s.state_dict()}

    def load_state_dict(self, state: dict):
        self._cursor_r.load_state_dict(state["cursor_r"])
        self._cursor_s.load_state_dict(state["cursor_s"])
