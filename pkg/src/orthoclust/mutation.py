"""Synthetic variant generation for standard word forms.

Each datapoint gets four constructed tokens alongside its standard and
observed forms: the reversal (rev), an OCR-style character confusion
(ocr), an adjacent-character swap (swp), and a single random character
mutation (rnd).  All randomness flows from per-datapoint streams derived
from a master seed, so output is independent of iteration order.
"""

from __future__ import annotations

import json
import random
import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import DataPoint
from .errors import ValidationError
from .seeding import derive_seed

VARIANT_KINDS = ("std", "obv", "rev", "ocr", "swp", "rnd")
SYNTHETIC_KINDS = ("rev", "ocr", "swp", "rnd")

DEFAULT_ALPHABET = string.ascii_lowercase


@dataclass(frozen=True)
class ConfusionTable:
    """Length-preserving character substitution table in OCR-confusion style."""

    entries: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        if not self.entries:
            raise ValidationError("confusion table is empty")
        for char, subs in self.entries.items():
            if len(char) != 1:
                raise ValidationError(f"confusion table key {char!r} is not a single character")
            if not subs or any(len(s) != 1 for s in subs):
                raise ValidationError(f"confusion entry for {char!r} must be single characters")
            if all(s == char for s in subs):
                raise ValidationError(f"confusion entry for {char!r} maps only to itself")

    def substitutes(self, char: str) -> tuple[str, ...]:
        """Substitute characters for ``char``, excluding ``char`` itself."""
        return tuple(s for s in self.entries.get(char, ()) if s != char)

    @classmethod
    def from_json(cls, path: str | Path) -> "ConfusionTable":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValidationError(f"confusion table {path} is not a JSON object")
        return cls(entries={k: tuple(v) for k, v in raw.items()})


def default_confusion_table() -> ConfusionTable:
    """The packaged OCR confusion table (swappable via ConfusionTable.from_json)."""
    raw = json.loads(resources.files("orthoclust.data").joinpath("ocr_confusions.json").read_text())
    return ConfusionTable(entries={k: tuple(v) for k, v in raw.items()})


@dataclass(frozen=True)
class VariantSet:
    """The six surface forms of a datapoint plus degeneracy flags.

    A kind is flagged degenerate when it could not be made distinct from
    the standard form (palindrome rev, length-1 swp, and so on); flagged
    variants are kept but excluded from co-clustering accuracy denominators.
    """

    datapoint_id: str
    forms: Mapping[str, str]
    degenerate_flags: frozenset[str]

    def __post_init__(self):
        missing = [k for k in VARIANT_KINDS if k not in self.forms]
        if missing:
            raise ValidationError(f"variant set {self.datapoint_id} missing kinds: {missing}")


def reverse_variant(word: str) -> str:
    """The word's Unicode scalar sequence reversed."""
    return word[::-1]


def random_char_variant(word: str, alphabet: str, rng: random.Random) -> str:
    """Replace one uniformly drawn position with a different alphabet character."""
    if not word:
        raise ValidationError("cannot mutate an empty word")
    if len(set(alphabet)) < 2:
        raise ValidationError("alphabet needs at least 2 distinct symbols")
    i = rng.randrange(len(word))
    choices = [c for c in alphabet if c != word[i]]
    return word[:i] + rng.choice(choices) + word[i + 1 :]


def ocr_variant(
    word: str,
    table: ConfusionTable,
    rng: random.Random,
    *,
    n_changes: int = 1,
    alphabet: str = DEFAULT_ALPHABET,
) -> str:
    """Replace confusable characters with uniformly drawn OCR substitutes.

    ``n_changes`` positions are mutated (capped by how many characters have
    table entries).  A word with no confusable characters falls back to
    random_char_variant; the caller flags that case.
    """
    if not word:
        raise ValidationError("cannot mutate an empty word")
    if n_changes < 1:
        raise ValidationError("n_changes must be >= 1")
    positions = [i for i, ch in enumerate(word) if table.substitutes(ch)]
    if not positions:
        return random_char_variant(word, alphabet, rng)
    chosen = sorted(rng.sample(positions, min(n_changes, len(positions))))
    chars = list(word)
    for i in chosen:
        chars[i] = rng.choice(table.substitutes(word[i]))
    return "".join(chars)


def swap_variant(word: str, rng: random.Random, *, alphabet: str = DEFAULT_ALPHABET) -> str:
    """Transpose two adjacent characters at a uniformly drawn position.

    Positions whose neighbors are equal are never drawn (a no-op swap).
    Length-1 words fall back to random_char_variant and all-equal-neighbor
    words are returned unchanged; the caller flags both as degenerate.
    """
    if not word:
        raise ValidationError("cannot mutate an empty word")
    if len(word) == 1:
        return random_char_variant(word, alphabet, rng)
    candidates = [i for i in range(len(word) - 1) if word[i] != word[i + 1]]
    if not candidates:
        return word
    i = rng.choice(candidates)
    return word[:i] + word[i + 1] + word[i] + word[i + 2 :]


def build_variant_set(
    datapoint: DataPoint,
    table: ConfusionTable,
    master_seed: int,
    *,
    alphabet: str = DEFAULT_ALPHABET,
    ocr_changes: int = 1,
) -> VariantSet:
    """Generate all six forms for a datapoint under its derived RNG stream.

    The stream seed hashes (master_seed, datapoint.id), so a datapoint's
    variants do not depend on where it sits in the dataset.  Draw order is
    fixed: ocr, then swp, then rnd.
    """
    rng = random.Random(derive_seed(master_seed, datapoint.id))
    std = datapoint.standard
    flags: set[str] = set()

    rev = reverse_variant(std)
    if rev == std:
        flags.add("rev")

    if not any(table.substitutes(ch) for ch in std):
        flags.add("ocr")
    ocr = ocr_variant(std, table, rng, n_changes=ocr_changes, alphabet=alphabet)

    swp = swap_variant(std, rng, alphabet=alphabet)
    if len(std) == 1 or swp == std:
        flags.add("swp")

    rnd = random_char_variant(std, alphabet, rng)

    if datapoint.observed == std:
        flags.add("obv")

    forms = {"std": std, "obv": datapoint.observed, "rev": rev, "ocr": ocr, "swp": swp, "rnd": rnd}
    return VariantSet(datapoint_id=datapoint.id, forms=forms, degenerate_flags=frozenset(flags))


def write_variants(path: str | Path, variant_sets: Iterable[VariantSet]) -> None:
    """Dump variant sets as JSONL records {id, kind, form, degenerate}."""
    with open(path, "w", encoding="utf-8") as fh:
        for vs in variant_sets:
            for kind in VARIANT_KINDS:
                record = {
                    "id": vs.datapoint_id,
                    "kind": kind,
                    "form": vs.forms[kind],
                    "degenerate": kind in vs.degenerate_flags,
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_variants(path: str | Path) -> dict[str, VariantSet]:
    """Read a variants dump back into VariantSets keyed by datapoint id."""
    forms: dict[str, dict[str, str]] = {}
    flags: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            forms.setdefault(rec["id"], {})[rec["kind"]] = rec["form"]
            if rec.get("degenerate"):
                flags.setdefault(rec["id"], set()).add(rec["kind"])
            else:
                flags.setdefault(rec["id"], set())
    return {
        dp_id: VariantSet(
            datapoint_id=dp_id, forms=kinds, degenerate_flags=frozenset(flags[dp_id])
        )
        for dp_id, kinds in forms.items()
    }
