"""Pulse-train approximation of network probabilities.

A probability p is a train of ``periods`` periods of R slots each; every
period holds one contiguous pulse of ``w = floor(p*R + 1/2)`` slots starting
at a uniformly random offset and wrapping around inside the period. The
fraction of set slots is the encoded value. Pointwise AND of trains plays
the weak product and bitwise NOT plays ``1 -``; since a train ANDed with
itself is itself, a node's train must be computed once and reused
everywhere it occurs.

Trains are packed into uint64 words. Offsets for atom ``a`` in chunk ``k``
(4096 periods) come from ``SeedSequence(seed, spawn_key=(key(a), k))``, so
the trains do not depend on how generation is split up.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from numbers import Real
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigMismatchError, InvalidValuationError, MissingAtomError, UnknownNodeError, ZeroEvidenceAreaError
from .network import Network, NodeKind

CHUNK_PERIODS = 4096


@dataclass(frozen=True)
class PulseConfig:
    slots_per_period: int = 64
    periods: int = 20_000
    seed: int = 0

    def __post_init__(self):
        if int(self.slots_per_period) != self.slots_per_period or self.slots_per_period < 2:
            raise ValueError("slots_per_period must be an integer >= 2")
        if int(self.periods) != self.periods or self.periods < 1:
            raise ValueError("periods must be a positive integer")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")

    @property
    def length(self) -> int:
        return self.slots_per_period * self.periods

    def shape(self) -> tuple[int, int]:
        """(slots per period, periods): trains of different seeds combine."""
        return (self.slots_per_period, self.periods)

    def width(self, p: Real) -> int:
        if not 0 <= p <= 1:
            raise InvalidValuationError(f"pulse probability must be in [0, 1], got {p!r}")
        return int(np.floor(float(p) * self.slots_per_period + 0.5))


def _word_count(length: int) -> int:
    return (length + 63) // 64


def _tail_mask(length: int) -> np.uint64:
    r = length % 64
    return np.uint64(0xFFFFFFFFFFFFFFFF) if r == 0 else np.uint64((1 << r) - 1)


class PulseTrain:
    """Immutable packed bit train. Bit i of the train is bit ``i % 64`` of
    word ``i // 64``."""

    __slots__ = ("config", "words")

    def __init__(self, config: PulseConfig, words: np.ndarray):
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (_word_count(config.length),):
            raise ValueError("word array does not match the configuration")
        words.flags.writeable = False
        self.config = config
        self.words = words

    @classmethod
    def from_bits(cls, config: PulseConfig, bits) -> PulseTrain:
        bits = np.asarray(bits, dtype=bool).ravel()
        if bits.size != config.length:
            raise ValueError(f"expected {config.length} bits, got {bits.size}")
        packed = np.packbits(bits, bitorder="little")
        pad = (-packed.size) % 8
        if pad:
            packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
        return cls(config, packed.view("<u8").astype(np.uint64))

    @classmethod
    def constant(cls, config: PulseConfig, value: bool) -> PulseTrain:
        n = _word_count(config.length)
        if not value:
            return cls(config, np.zeros(n, dtype=np.uint64))
        words = np.full(n, np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
        words[-1] &= _tail_mask(config.length)
        return cls(config, words)

    @property
    def bits(self) -> np.ndarray:
        raw = self.words.astype("<u8").view(np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.config.length].astype(bool)

    def periods_view(self) -> np.ndarray:
        """Bits as a (periods, R) boolean matrix."""
        return self.bits.reshape(self.config.periods, self.config.slots_per_period)

    @property
    def ones(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    @property
    def area(self) -> float:
        return self.ones / self.config.length

    def __eq__(self, other):
        if not isinstance(other, PulseTrain):
            return NotImplemented
        return self.config.shape() == other.config.shape() and np.array_equal(self.words, other.words)

    __hash__ = None

    def __and__(self, other: PulseTrain) -> PulseTrain:
        return pt_product(self, other)

    def __invert__(self) -> PulseTrain:
        return pt_complement(self)

    def __repr__(self):
        return f"PulseTrain(area={self.area:.6f}, R={self.config.slots_per_period}, periods={self.config.periods})"


def _check_same(a: PulseTrain, b: PulseTrain) -> None:
    if a.config.shape() != b.config.shape():
        raise ConfigMismatchError(f"trains differ in shape: {a.config.shape()} vs {b.config.shape()}")


def pt_product(a: PulseTrain, b: PulseTrain) -> PulseTrain:
    _check_same(a, b)
    return PulseTrain(a.config, a.words & b.words)


def pt_complement(a: PulseTrain) -> PulseTrain:
    words = ~a.words
    words[-1] &= _tail_mask(a.config.length)
    return PulseTrain(a.config, words)


def stream_key(stream: str) -> int:
    return int.from_bytes(hashlib.sha256(stream.encode("utf-8")).digest()[:8], "little")


def _offsets(cfg: PulseConfig, stream: str) -> np.ndarray:
    key = stream_key(stream)
    out = np.empty(cfg.periods, dtype=np.int64)
    for k, start in enumerate(range(0, cfg.periods, CHUNK_PERIODS)):
        stop = min(start + CHUNK_PERIODS, cfg.periods)
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(key, k)))
        out[start:stop] = rng.integers(0, cfg.slots_per_period, size=stop - start)
    return out


def make_train(p: Real, cfg: PulseConfig, stream: str) -> PulseTrain:
    """Train for probability ``p`` on the random substream named ``stream``."""
    w = cfg.width(p)
    R = cfg.slots_per_period
    if w == 0:
        return PulseTrain.constant(cfg, False)
    if w == R:
        return PulseTrain.constant(cfg, True)
    offsets = _offsets(cfg, stream)
    slots = np.arange(R)
    # row o: a width-w pulse starting at slot o, wrapping within the period
    rotations = ((slots[None, :] - slots[:, None]) % R) < w
    return PulseTrain.from_bits(cfg, rotations[offsets])


class TrainCache:
    """One train per atom under one configuration; repeated lookups return
    the identical object."""

    def __init__(self, cfg: PulseConfig):
        self.cfg = cfg
        self._trains: dict[str, tuple[Real, PulseTrain]] = {}

    def get(self, atom: str, p: Real) -> PulseTrain:
        hit = self._trains.get(atom)
        if hit is not None:
            if hit[0] != p:
                raise ValueError(f"atom {atom!r} already has a train for value {hit[0]!r}")
            return hit[1]
        t = make_train(p, self.cfg, atom)
        self._trains[atom] = (p, t)
        return t

    def __contains__(self, atom: str) -> bool:
        return atom in self._trains

    def __len__(self):
        return len(self._trains)


def node_trains(
    net: Network,
    nodes: Iterable[str],
    valuation: Mapping[str, Real],
    cache: TrainCache,
) -> dict[str, PulseTrain]:
    """Trains of ``nodes`` and all their ancestors from one topological
    sweep; each node's train is computed once and reused by its children."""
    nodes = list(nodes)
    for n in nodes:
        if n not in net:
            raise UnknownNodeError(n)
    needed = net.ancestors(nodes)
    cfg = cache.cfg
    ones = PulseTrain.constant(cfg, True)

    def label_train(label):
        if label == 1:
            return ones
        if label not in valuation:
            raise MissingAtomError(label)
        return cache.get(label, valuation[label])

    out: dict[str, PulseTrain] = {}
    for nid in net.topological_order():
        if nid not in needed:
            continue
        n = net[nid]
        if n.kind is NodeKind.ROOT:
            out[nid] = ones
            continue
        fires = []
        for l in n.links:
            parent = out[l.source]
            fires.append(label_train(l.label) & (~parent if l.inhibitory else parent))
        if n.kind is NodeKind.OR:
            acc = ~fires[0]
            for f in fires[1:]:
                acc = acc & ~f
            out[nid] = ~acc
        else:
            acc = label_train(n.joint_label)
            for f in fires:
                acc = acc & f
            out[nid] = acc
    return out


def _literal_pairs(lits) -> list[tuple[str, bool]]:
    from .inference import as_literals

    return [(l.node, l.positive) for l in as_literals(lits)]


def _event_train(trains: Mapping[str, PulseTrain], pairs, cfg: PulseConfig) -> PulseTrain:
    acc = PulseTrain.constant(cfg, True)
    for node, positive in pairs:
        t = trains[node]
        acc = acc & (t if positive else ~t)
    return acc


def estimate_event(net: Network, lits, valuation: Mapping[str, Real], cfg: PulseConfig, cache: TrainCache | None = None) -> float:
    pairs = _literal_pairs(lits)
    if cache is None:
        cache = TrainCache(cfg)
    if cache.cfg != cfg:
        raise ConfigMismatchError("cache was built for a different configuration")
    trains = node_trains(net, [n for n, _ in pairs], valuation, cache)
    return _event_train(trains, pairs, cfg).area


def estimate_conditional(net: Network, query, valuation: Mapping[str, Real], cfg: PulseConfig, cache: TrainCache | None = None) -> float:
    """area(targets and evidence) / area(evidence), from one shared sweep."""
    from .inference import Query, parse_query

    if isinstance(query, str):
        query = parse_query(query)
    if not isinstance(query, Query):
        raise TypeError("query must be a Query or query text")
    targets = [(l.node, l.positive) for l in query.targets]
    evidence = [(l.node, l.positive) for l in query.evidence]
    if cache is None:
        cache = TrainCache(cfg)
    if cache.cfg != cfg:
        raise ConfigMismatchError("cache was built for a different configuration")
    trains = node_trains(net, [n for n, _ in targets + evidence], valuation, cache)
    ev = _event_train(trains, evidence, cfg)
    if ev.ones == 0:
        raise ZeroEvidenceAreaError("evidence pulse train is empty")
    both = ev & _event_train(trains, targets, cfg)
    return both.ones / ev.ones


@dataclass(frozen=True)
class RepeatedEstimate:
    mean: float
    std: float
    values: tuple[float, ...]


def repeated_estimate(net: Network, query, valuation, cfg: PulseConfig, repeats: int) -> RepeatedEstimate:
    """Estimates for seeds ``cfg.seed .. cfg.seed + repeats - 1``."""
    if repeats < 1:
        raise ValueError("repeats must be positive")
    vals = []
    for k in range(repeats):
        c = PulseConfig(cfg.slots_per_period, cfg.periods, cfg.seed + k)
        vals.append(estimate_conditional(net, query, valuation, c))
    arr = np.array(vals)
    std = float(arr.std(ddof=1)) if repeats > 1 else 0.0
    return RepeatedEstimate(float(arr.mean()), std, tuple(vals))
