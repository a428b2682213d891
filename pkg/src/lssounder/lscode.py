"""LS codes and the LS code tree.

An LS code lays out a Golay pair as ``C, 0*G, S, 0*T``: the zero gap keeps
the C and S halves of two codes from overlapping for shifts up to ``G``.

Tree nodes hold a Golay pair and its mate. A node with pair ``X = (A, B)``
and mate ``Y = (A', B')`` has two children::

    child 2p   : (A + A', B + B')
    child 2p+1 : (A' + A, B' + B)

(``+`` is concatenation). Both children are again Golay pairs, the two codes
in one node cross-correlate to zero at every shift, and codes whose deepest
common ancestor sits at layer ``l`` are interference free for shifts below
that ancestor's sub-code length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .golay import GolayPair, as_sequence, generate_pair, mate

MAX_DEPTH = 8
MAX_SUBCODE_LENGTH = 2 ** 16
FAMILIES = ("base", "mate")


class CodeId(NamedTuple):
    layer: int
    node: int
    family: str

    def __str__(self) -> str:
        return f"L{self.layer}N{self.node}{self.family[0]}"

    @classmethod
    def parse(cls, text: str) -> "CodeId":
        try:
            head, fam = text[:-1], text[-1]
            layer, node = head[1:].split("N")
            family = {"b": "base", "m": "mate"}[fam]
            return cls(int(layer), int(node), family)
        except (ValueError, KeyError, IndexError):
            raise ValueError(f"malformed code id {text!r}") from None


@dataclass(frozen=True, eq=False)
class LsCode:
    c_part: np.ndarray
    s_part: np.ndarray
    gap: int
    trailing_gap: int
    id: CodeId = CodeId(0, 0, "base")
    chips: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        c = as_sequence(self.c_part)
        s = as_sequence(self.s_part)
        if c.size != s.size:
            raise ValueError(f"C and S parts differ in length: {c.size} != {s.size}")
        if self.gap < 0 or self.trailing_gap < 0:
            raise ValueError("gap lengths must be non-negative")
        chips = np.concatenate([
            c,
            np.zeros(self.gap, dtype=np.int64),
            s,
            np.zeros(self.trailing_gap, dtype=np.int64),
        ])
        chips.setflags(write=False)
        object.__setattr__(self, "c_part", c)
        object.__setattr__(self, "s_part", s)
        object.__setattr__(self, "id", CodeId(*self.id))
        object.__setattr__(self, "chips", chips)

    @property
    def part_length(self) -> int:
        return int(self.c_part.size)

    @property
    def s_offset(self) -> int:
        return self.part_length + self.gap

    def __len__(self) -> int:
        return int(self.chips.size)

    def active_mask(self) -> np.ndarray:
        """True at chip positions that carry C or S (not gap zeros)."""
        mask = np.zeros(len(self), dtype=bool)
        mask[:self.part_length] = True
        mask[self.s_offset:self.s_offset + self.part_length] = True
        return mask


def assemble(c_part, s_part, gap: int, trailing_gap: int = 0,
             code_id: CodeId = CodeId(0, 0, "base")) -> LsCode:
    return LsCode(c_part, s_part, int(gap), int(trailing_gap), code_id)


@dataclass(frozen=True)
class LsCodeTree:
    seed: GolayPair
    depth: int
    layers: tuple  # layers[l][node] -> (base pair, mate pair)

    @property
    def seed_length(self) -> int:
        return len(self.seed)

    def subcode_length(self, layer: int) -> int:
        return self.seed_length * 2 ** layer

    def pair(self, code_id: CodeId) -> GolayPair:
        layer, node, family = code_id
        if not 0 <= layer <= self.depth or not 0 <= node < 2 ** layer:
            raise KeyError(f"no code {code_id} in a depth-{self.depth} tree")
        if family not in FAMILIES:
            raise KeyError(f"unknown family {family!r}")
        return self.layers[layer][node][FAMILIES.index(family)]


def expand(seed: GolayPair, depth: int, max_length: int = MAX_SUBCODE_LENGTH) -> LsCodeTree:
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in 0..{MAX_DEPTH}, got {depth}")
    if len(seed) * 2 ** depth > max_length:
        raise ValueError(
            f"sub-code length {len(seed)} * 2**{depth} exceeds the limit {max_length}")
    layers = [((seed, mate(seed)),)]
    for _ in range(depth):
        children = []
        for x, y in layers[-1]:
            for first, second in ((x, y), (y, x)):
                base = GolayPair(np.concatenate([first.c, second.c]),
                                 np.concatenate([first.s, second.s]))
                children.append((base, mate(base)))
        layers.append(tuple(children))
    return LsCodeTree(seed, depth, tuple(layers))


@dataclass(frozen=True)
class LsCodeSet:
    codes: tuple
    seed_length: int

    def __post_init__(self):
        if not self.codes:
            raise ValueError("a code set needs at least one code")
        lengths = {len(code) for code in self.codes}
        if len(lengths) != 1:
            raise ValueError(f"codes in a set must share one length, got {sorted(lengths)}")
        ids = [code.id for code in self.codes]
        if len(set(ids)) != len(ids):
            raise ValueError("code ids in a set must be distinct")

    def __len__(self) -> int:
        return len(self.codes)

    def __iter__(self):
        return iter(self.codes)

    def __getitem__(self, index):
        return self.codes[index]


def code_set(tree: LsCodeTree, layer: int, gap: int, trailing_gap: int | None = None) -> LsCodeSet:
    """All codes of one tree layer, base then mate for every node."""
    if not 0 <= layer <= tree.depth:
        raise ValueError(f"layer {layer} out of range 0..{tree.depth}")
    if trailing_gap is None:
        trailing_gap = gap
    codes = []
    for node, pairs in enumerate(tree.layers[layer]):
        for family, pair in zip(FAMILIES, pairs):
            codes.append(assemble(pair.c, pair.s, gap, trailing_gap, CodeId(layer, node, family)))
    return LsCodeSet(tuple(codes), tree.seed_length)


def predicted_ifw(tree: LsCodeTree, id_i: CodeId, id_j: CodeId, gap: int) -> int:
    """Interference-free window (chips) implied by the tree positions.

    Codes sharing a node are bounded only by the gap; otherwise the window
    is the sub-code length of the deepest common ancestor, capped by the gap.
    """
    id_i, id_j = CodeId(*id_i), CodeId(*id_j)
    tree.pair(id_i)
    tree.pair(id_j)
    if id_i.layer != id_j.layer:
        raise ValueError("codes from different layers have different lengths")
    a, b, layer = id_i.node, id_j.node, id_i.layer
    if a == b:
        return gap
    while a != b:
        a, b, layer = a // 2, b // 2, layer - 1
    return min(gap, tree.subcode_length(layer))


def default_code_set(k: int = 12, gap: int = 4000, trailing_gap: int | None = None) -> LsCodeSet:
    """Layer-0 pair used by the 2x2 sounder (base code, mate code)."""
    return code_set(expand(generate_pair(k), 0), 0, gap, trailing_gap)
