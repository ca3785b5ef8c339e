"""Online correlated selection.

A selector receives pairs of ground elements one at a time and picks one
element from each pair.  Three selectors are provided:

* ``independent``: a fresh fair coin per pair (no correlation).
* ``warmup``: per-element ``tau`` memory; a sender forwards its choice for one
  random element, a receiver reads one random element's memory and selects
  oppositely.
* ``improved``: each pair node is a sender with probability ``p``.  A sender
  picks its selection and one out-arc uniformly; a receiver inspects both
  in-arcs and takes the opposite selection along a sender arc aimed at it.

All random draws go through a :class:`RandomSource`, which lets the exact
oracle enumerate every branch of the real selector code.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import DomainError

Pair = tuple[int, int]

UNKNOWN, SELECTED, NOT_SELECTED = 0, 1, 2


class RandomSource:
    """Stream of Bernoulli draws backed by a numpy generator."""

    def __init__(self, rng: np.random.Generator | int | None = None):
        if not isinstance(rng, np.random.Generator):
            rng = np.random.Generator(np.random.PCG64(rng))
        self.rng = rng

    def bernoulli(self, p: float) -> bool:
        return bool(self.rng.random() < p)

    def coin(self) -> bool:
        return self.bernoulli(0.5)


@dataclass(frozen=True)
class SelectorKind:
    name: str
    p: float | None = None

    def __post_init__(self):
        if self.name not in ("independent", "warmup", "improved"):
            raise DomainError(f"unknown selector kind {self.name!r}")
        if self.name == "improved":
            if self.p is None or not (0.0 < self.p < 1.0):
                raise DomainError(f"improved selector needs 0 < p < 1, got {self.p!r}")

    @classmethod
    def independent(cls) -> "SelectorKind":
        return cls("independent")

    @classmethod
    def warmup(cls) -> "SelectorKind":
        return cls("warmup")

    @classmethod
    def improved(cls, p: float | None = None) -> "SelectorKind":
        if p is None:
            from .recurrences import optimal_p

            p = optimal_p()[0]
        return cls("improved", p)

    @classmethod
    def parse(cls, text: str) -> "SelectorKind":
        """Parse ``independent``, ``warmup``, ``improved`` or ``improved:<p>``."""
        name, _, arg = text.partition(":")
        if name == "improved":
            return cls.improved(float(arg) if arg else None)
        return cls(name)

    @property
    def gamma(self) -> float:
        """Correlation level this selector guarantees."""
        from .recurrences import WARMUP_COEFF, gamma_from_p

        if self.name == "independent":
            return 0.0
        if self.name == "warmup":
            return WARMUP_COEFF
        return gamma_from_p(self.p)

    def __str__(self) -> str:
        return self.name if self.p is None else f"{self.name}:{self.p:.10g}"


def _check_pair(pair: Sequence[int]) -> Pair:
    if len(pair) != 2:
        raise DomainError(f"a pair has exactly two elements, got {pair!r}")
    a, b = pair
    if a == b:
        raise DomainError(f"degenerate pair {pair!r}: both entries are the same element")
    return a, b


class Selector:
    kind: SelectorKind

    def __init__(self, source: RandomSource):
        self.source = source
        self.history: list[int] = []

    def select(self, pair: Sequence[int]) -> int:
        pair = _check_pair(pair)
        chosen = self._select(pair)
        self.history.append(chosen)
        return chosen

    def _select(self, pair: Pair) -> int:
        raise NotImplementedError

    def state_key(self) -> Hashable:
        """Summary of the state that can influence future selections."""
        raise NotImplementedError

    def fork(self, source: RandomSource) -> "Selector":
        clone = copy.copy(self)
        clone.__dict__ = {k: copy.copy(v) for k, v in self.__dict__.items()}
        clone.source = source
        return clone


class IndependentSelector(Selector):
    kind = SelectorKind.independent()

    def _select(self, pair: Pair) -> int:
        return pair[1] if self.source.coin() else pair[0]

    def state_key(self) -> Hashable:
        return ()


class WarmupSelector(Selector):
    """Sender/receiver selector with a three-valued memory per element."""

    kind = SelectorKind.warmup()

    def __init__(self, source: RandomSource):
        super().__init__(source)
        self.tau: dict[int, int] = {}

    def _select(self, pair: Pair) -> int:
        draw = self.source.coin
        if draw():
            # sender: l picks the selection, m picks the element whose memory is kept
            ell = int(draw())
            m = int(draw())
            self.tau[pair[1 - m]] = UNKNOWN
            self.tau[pair[m]] = SELECTED if m == ell else NOT_SELECTED
        else:
            m = int(draw())
            state = self.tau.get(pair[m], UNKNOWN)
            if state == SELECTED:
                ell = 1 - m
            elif state == NOT_SELECTED:
                ell = m
            else:
                ell = int(draw())
            self.tau[pair[0]] = self.tau[pair[1]] = UNKNOWN
        return pair[ell]

    def state_key(self) -> Hashable:
        return frozenset((e, t) for e, t in self.tau.items() if t != UNKNOWN)


@dataclass
class PairNode:
    is_sender: bool
    selection: int
    sent_toward: int | None = None


@dataclass
class ImprovedState:
    """Ex-ante bookkeeping and the realized ex-post arcs of the improved selector."""

    last_pair: dict[int, int] = field(default_factory=dict)
    nodes: list[PairNode] = field(default_factory=list)
    arcs: list[tuple[int, int, int]] = field(default_factory=list)


class ImprovedSelector(Selector):
    def __init__(self, source: RandomSource, p: float):
        super().__init__(source)
        self.kind = SelectorKind.improved(p)
        self.p = p
        self.state = ImprovedState()
        self.pairs: list[Pair] = []

    def fork(self, source: RandomSource) -> "ImprovedSelector":
        clone = super().fork(source)
        clone.state = ImprovedState(dict(self.state.last_pair), list(self.state.nodes), list(self.state.arcs))
        return clone

    def _select(self, pair: Pair) -> int:
        st = self.state
        j = len(st.nodes)
        draw = self.source.coin
        if self.source.bernoulli(self.p):
            chosen = pair[int(draw())]
            node = PairNode(True, chosen, pair[int(draw())])
        else:
            incoming = []
            for elem in pair:
                prev = st.last_pair.get(elem)
                if prev is not None:
                    sender = st.nodes[prev]
                    if sender.is_sender and sender.sent_toward == elem:
                        incoming.append((prev, elem))
            if incoming:
                prev, elem = incoming[int(draw())] if len(incoming) == 2 else incoming[0]
                other = pair[1] if pair[0] == elem else pair[0]
                chosen = other if st.nodes[prev].selection == elem else elem
                st.arcs.append((prev, j, elem))
            else:
                chosen = pair[int(draw())]
            node = PairNode(False, chosen)
        st.nodes.append(node)
        for elem in pair:
            st.last_pair[elem] = j
        self.pairs.append(pair)
        return chosen

    def state_key(self) -> Hashable:
        st = self.state
        live = []
        for elem, j in st.last_pair.items():
            node = st.nodes[j]
            if node.is_sender and node.sent_toward == elem:
                live.append((elem, node.selection == elem))
        return frozenset(live)

    def check_expost_matching(self) -> list[str]:
        """Return descriptions of every violated ex-post arc property (empty if none)."""
        problems = []
        seen: dict[int, tuple[int, int, int]] = {}
        for arc in self.state.arcs:
            src, dst, elem = arc
            if not src < dst:
                problems.append(f"arc {arc} does not point forward")
            if elem not in self.pairs[src] or elem not in self.pairs[dst]:
                problems.append(f"arc {arc} labels an element missing from an endpoint")
            if any(elem in self.pairs[t] for t in range(src + 1, dst)):
                problems.append(f"arc {arc} skips a pair containing {elem}")
            for node in (src, dst):
                if node in seen:
                    problems.append(f"node {node} is incident to arcs {seen[node]} and {arc}")
                seen[node] = arc
        return problems


def make_selector(kind: SelectorKind, source: RandomSource) -> Selector:
    if kind.name == "independent":
        return IndependentSelector(source)
    if kind.name == "warmup":
        return WarmupSelector(source)
    return ImprovedSelector(source, kind.p)


def new_selector(kind: SelectorKind | str, seed: int | np.random.Generator | None) -> Selector:
    """Build a selector whose behavior is fixed by ``(kind, seed)``."""
    if isinstance(kind, str):
        kind = SelectorKind.parse(kind)
    return make_selector(kind, RandomSource(seed))


def consecutive_decomposition(
    pairs: Sequence[Sequence[int]], element: int, subsequence: Iterable[int]
) -> list[int]:
    """Split ``subsequence`` into maximal runs of consecutive pairs containing ``element``.

    A run is consecutive when it contains every pair holding ``element``
    between its first and last member.  Returns the run lengths in order.
    """
    indices = sorted(set(subsequence))
    for idx in indices:
        if not 0 <= idx < len(pairs):
            raise IndexError(f"pair index {idx} out of range for {len(pairs)} pairs")
        if element not in pairs[idx]:
            raise DomainError(f"pair {idx} = {tuple(pairs[idx])} does not contain element {element}")
    rank = {j: r for r, j in enumerate(j for j, pr in enumerate(pairs) if element in pr)}
    runs: list[int] = []
    last = None
    for idx in indices:
        r = rank[idx]
        if last is not None and r == last + 1:
            runs[-1] += 1
        else:
            runs.append(1)
        last = r
    return runs


def simulate_batch(
    kind: SelectorKind, pairs: Sequence[Sequence[int]], trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Run ``trials`` independent copies of a selector on one pair sequence.

    Returns an int8 array of shape ``(trials, len(pairs))`` holding 0 when the
    first element of a pair was selected and 1 for the second.  This is a
    vectorized re-implementation; per-element memory is encoded as
    ``UNKNOWN/SELECTED/NOT_SELECTED`` for both stateful selectors.
    """
    pairs = [_check_pair(pr) for pr in pairs]
    out = np.empty((trials, len(pairs)), dtype=np.int8)
    if kind.name == "independent":
        for j in range(len(pairs)):
            out[:, j] = rng.random(trials) < 0.5
        return out

    ids = {e: n for n, e in enumerate(sorted({e for pr in pairs for e in pr}))}
    memory = np.zeros((trials, len(ids)), dtype=np.int8)
    rows = np.arange(trials)
    p_send = 0.5 if kind.name == "warmup" else kind.p
    for j, (a, b) in enumerate(pairs):
        ca, cb = ids[a], ids[b]
        sender = rng.random(trials) < p_send
        u1 = (rng.random(trials) < 0.5).astype(np.int8)
        u2 = (rng.random(trials) < 0.5).astype(np.int8)
        mem_a, mem_b = memory[:, ca], memory[:, cb]

        # sender: u1 is the selection, u2 the element whose memory is written
        remembered = np.where(u1 == u2, SELECTED, NOT_SELECTED).astype(np.int8)
        if kind.name == "warmup":
            m = u1
            read = np.where(m == 0, mem_a, mem_b)
            recv = np.where(read == SELECTED, 1 - m, np.where(read == NOT_SELECTED, m, u2))
        else:
            qa, qb = mem_a != UNKNOWN, mem_b != UNKNOWN
            m = np.where(qa & qb, u1, np.where(qa, 0, 1)).astype(np.int8)
            read = mem_a * (m == 0) + mem_b * (m == 1)
            recv = np.where(read == SELECTED, 1 - m, np.where(read == NOT_SELECTED, m, u1))
            recv = np.where(qa | qb, recv, u1)
        out[:, j] = np.where(sender, u1, recv)
        memory[rows, ca] = np.where(sender & (u2 == 0), remembered, UNKNOWN)
        memory[rows, cb] = np.where(sender & (u2 == 1), remembered, UNKNOWN)
    return out
