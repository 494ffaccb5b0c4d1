"""Signed alphabet, reduced words and the density-model sampler.

A letter is a nonzero int: generator g (0-based) is ``g + 1`` and its
inverse is ``-(g + 1)``.  Words are tuples of letters.  In text form
generators are ``a..z`` and inverses ``A..Z``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Word = tuple  # tuple[int, ...]

MAX_COUNT = 2**63 - 1
MAX_RETRIES = 10**6


class CapacityError(OverflowError):
    pass


def letter(g: int, sign: int = 1) -> int:
    return (g + 1) if sign > 0 else -(g + 1)


def generator_index(x: int) -> int:
    return abs(x) - 1


def inverse_letter(x: int) -> int:
    return -x


def inverse_word(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    if not is_reduced(w):
        return False
    return len(w) < 2 or w[-1] != -w[0]


def free_reduce(w: Iterable[int]) -> Word:
    out: list[int] = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(w: Iterable[int]) -> Word:
    w = free_reduce(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j]


def rotate(w: Sequence[int], k: int) -> Word:
    n = len(w)
    if n == 0:
        return ()
    k %= n
    return tuple(w[k:]) + tuple(w[:k])


def min_rotation(w: Sequence[int]) -> Word:
    if not w:
        return ()
    return min(rotate(w, k) for k in range(len(w)))


def canonical_cyclic(w: Sequence[int]) -> Word:
    """Least rotation over both orientations of a cyclic word."""
    if not w:
        return ()
    return min(min_rotation(w), min_rotation(inverse_word(w)))


def cyclic_translates_and_inversion(w: Sequence[int]) -> set:
    w = tuple(w)
    if not is_cyclically_reduced(w):
        raise ValueError("word must be cyclically reduced")
    inv = inverse_word(w)
    return {rotate(w, k) for k in range(len(w))} | {rotate(inv, k) for k in range(len(w))}


def primitive_period(w: Sequence[int]) -> int:
    """Smallest p > 0 with rotate(w, p) == w."""
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and tuple(w[p:]) + tuple(w[:p]) == tuple(w):
            return p
    return n


# -- text form ---------------------------------------------------------

def letter_to_char(x: int) -> str:
    g = abs(x) - 1
    if not 0 <= g < 26:
        raise ValueError(f"letter {x} outside a..z")
    return chr(ord("a") + g) if x > 0 else chr(ord("A") + g)


def word_to_str(w: Sequence[int]) -> str:
    return "".join(letter_to_char(x) for x in w)


def parse_word(s: str) -> Word:
    out = []
    for ch in s.strip():
        if "a" <= ch <= "z":
            out.append(ord(ch) - ord("a") + 1)
        elif "A" <= ch <= "Z":
            out.append(-(ord(ch) - ord("A") + 1))
        elif ch in " \t":
            continue
        else:
            raise ValueError(f"bad letter {ch!r}")
    return tuple(out)


# -- density model -----------------------------------------------------

def as_fraction(d) -> Fraction:
    if isinstance(d, Fraction):
        return d
    if isinstance(d, float):
        # decimal literal semantics: 0.2 means 1/5, not its binary neighbour
        return Fraction(repr(d))
    return Fraction(d)


def _iroot_floor(n: int, k: int) -> int:
    """Largest r with r**k <= n."""
    if n < 2 or k == 1:
        return n
    r = int(round(n ** (1.0 / k))) if n.bit_length() < 1000 else 1 << (n.bit_length() // k + 1)
    # Newton from above, then fix up by exact comparisons
    if r <= 0:
        r = 1
    while r**k > n:
        r = ((k - 1) * r + n // r ** (k - 1)) // k
    while (r + 1) ** k <= n:
        r += 1
    return r


def relator_count(m: int, d, l: int) -> int:
    """floor((2m-1)^(d*l)), evaluated exactly for rational d."""
    if m < 1 or l < 1:
        raise ValueError("need m >= 1 and l >= 1")
    d = as_fraction(d)
    if not 0 < d < 1:
        raise ValueError("density must lie in (0, 1)")
    base = 2 * m - 1
    if base == 1:
        return 1
    e = d * l
    p, q = e.numerator, e.denominator
    # (2m-1)^(p/q) overflows int64 once p*log(base)/q > 63*log(2)
    if p * np.log2(base) / q > 64:
        raise CapacityError(f"relator count (2m-1)^(dl) exceeds int64 for m={m}, d={d}, l={l}")
    val = _iroot_floor(base**p, q)
    if val > MAX_COUNT:
        raise CapacityError("relator count exceeds int64")
    return val


def child_seed(master: int, index: int) -> int:
    """Seed for trial ``index`` derived from ``master`` independently of scheduling."""
    ss = np.random.SeedSequence([int(master) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & (2**64 - 1)))


def _letters(m: int) -> list:
    return [i + 1 for i in range(m)] + [-(i + 1) for i in range(m)]


def sample_relator(m: int, l: int, rng: np.random.Generator) -> Word:
    """Uniform cyclically reduced word of length l."""
    if m < 2 or l < 2:
        raise ValueError("need m >= 2 and l >= 2")
    alphabet = _letters(m)
    followers = {x: [y for y in alphabet if y != -x] for x in alphabet}
    for _ in range(MAX_RETRIES):
        w = [alphabet[int(rng.integers(2 * m))]]
        steps = rng.integers(2 * m - 1, size=l - 1)
        for k in steps:
            w.append(followers[w[-1]][int(k)])
        if w[-1] != -w[0]:
            return tuple(w)
    raise RuntimeError("rejection sampler exceeded retry cap")


@dataclass(frozen=True)
class Presentation:
    m: int
    l: int
    d: Fraction
    relators: tuple
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be positive")
        for r in self.relators:
            if len(r) != self.l:
                raise ValueError(f"relator {word_to_str(r)} has length {len(r)} != {self.l}")
            if not is_cyclically_reduced(r):
                raise ValueError(f"relator {word_to_str(r)} is not cyclically reduced")
            if any(abs(x) > self.m for x in r):
                raise ValueError(f"relator {word_to_str(r)} uses a generator beyond m={self.m}")

    @property
    def count(self) -> int:
        return len(self.relators)

    def to_text(self) -> str:
        head = f"{self.m} {self.l} {self.d} {self.seed}"
        return "\n".join([head] + [word_to_str(r) for r in self.relators]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Presentation":
        lines = text.splitlines()
        m, l, d, seed = lines[0].split()
        rels = tuple(parse_word(s) for s in lines[1:] if s.strip())
        return cls(int(m), int(l), Fraction(d), rels, int(seed))

    @classmethod
    def from_strings(cls, rels: Sequence[str], m: int | None = None, d="1/10", seed: int = 0):
        ws = tuple(parse_word(s) for s in rels)
        if m is None:
            m = max(abs(x) for w in ws for x in w)
        return cls(m, len(ws[0]), as_fraction(d), ws, seed)


def sample_presentation(m: int, d, l: int, seed: int) -> Presentation:
    if l % 2:
        raise ValueError("l must be even: the wall construction assumes even relator length")
    n = relator_count(m, d, l)
    rng = make_rng(seed)
    rels = tuple(sample_relator(m, l, rng) for _ in range(n))
    return Presentation(m, l, as_fraction(d), rels, int(seed))
