"""Phonetic encoding and character-level edit analysis.

Implements the original (1990) Metaphone rule set, plain Levenshtein
distance over Unicode scalars, and extraction of merged edit signatures
(e.g. ``er->ah`` for after/aftah) from a minimal-cost alignment.
"""

from __future__ import annotations

from dataclasses import dataclass

_VOWELS = frozenset("AEIOU")
_SOFT = frozenset("EIY")  # make a preceding C or G soft
_SILENT_H_AFTER = frozenset("CGPST")  # H is not voiced after these
_GH_KEEPS_G = frozenset("BDH")  # ...GH does not turn into F after these


def _ascii_letters_only(word: str) -> str:
    return "".join(ch for ch in word if "a" <= ch <= "z" or "A" <= ch <= "Z")


def metaphone(word: str, max_length: int | None = None) -> str:
    """Encode a word with the original Metaphone algorithm.

    Non-ASCII-alphabetic characters are stripped before encoding; an input
    with no letters encodes to the empty string.  Codes are unbounded by
    default; pass ``max_length`` to truncate (some references cap at 4).

    Matches the reference JavaScript implementation (npm ``metaphone`` 2.x)
    on alphabetic input.
    """
    s = _ascii_letters_only(word).upper()
    if not s:
        return ""
    n = len(s)

    def at(i: int) -> str:
        return s[i] if 0 <= i < n else ""

    out: list[str] = []
    i = 0

    # Initial-letter exceptions.  When none applies, the first letter is
    # left for the main loop.
    first, second = s[0], at(1)
    if first == "A":
        if second == "E":
            out.append("E")
            i = 2
        else:
            out.append("A")
            i = 1
    elif first in "GKP":
        if second == "N":
            out.append("N")
            i = 2
    elif first == "W":
        if second == "R":
            out.append("R")
            i = 2
        elif second == "H":
            out.append("W")
            i = 2
        elif second in _VOWELS:
            out.append("W")
            i = 2
    elif first == "X":
        out.append("S")
        i = 1
    elif first in "EIOU":
        out.append(first)
        i = 1

    while i < n:
        skip = 1
        c = s[i]
        prev = at(i - 1)
        nxt = at(i + 1)

        # Doubled letters collapse, except C (as in "success").
        if c == prev and c != "C":
            i += 1
            continue

        if c == "B":
            if prev != "M":
                out.append("B")
        elif c == "C":
            if nxt in _SOFT:
                if nxt == "I" and at(i + 2) == "A":
                    out.append("X")
                elif prev != "S":
                    out.append("S")
            elif nxt == "H":
                out.append("X")
                skip = 2
            else:
                out.append("K")
        elif c == "D":
            if nxt == "G" and at(i + 2) in _SOFT:
                out.append("J")
                skip = 2
            else:
                out.append("T")
        elif c == "G":
            if nxt == "H":
                if not (at(i - 3) in _GH_KEEPS_G or at(i - 4) == "H"):
                    out.append("F")
                    skip = 2
            elif nxt == "N":
                # GN at word end and GNED keep the G silent.
                tail = at(i + 2)
                if tail and not (tail == "E" and at(i + 3) == "D"):
                    out.append("K")
            elif nxt in _SOFT and prev != "G":
                out.append("J")
            else:
                out.append("K")
        elif c == "H":
            if nxt in _VOWELS and prev not in _SILENT_H_AFTER:
                out.append("H")
        elif c == "K":
            if prev != "C":
                out.append("K")
        elif c == "P":
            out.append("F" if nxt == "H" else "P")
        elif c == "Q":
            out.append("K")
        elif c == "S":
            if nxt == "I" and at(i + 2) in ("O", "A"):
                out.append("X")
            elif nxt == "H":
                out.append("X")
                skip = 2
            else:
                out.append("S")
        elif c == "T":
            if nxt == "I" and at(i + 2) in ("O", "A"):
                out.append("X")
            elif nxt == "H":
                out.append("0")
                skip = 2
            elif not (nxt == "C" and at(i + 2) == "H"):
                out.append("T")
        elif c == "V":
            out.append("F")
        elif c == "W":
            if nxt in _VOWELS:
                out.append("W")
        elif c == "X":
            out.append("KS")
        elif c == "Y":
            if nxt in _VOWELS:
                out.append("Y")
        elif c == "Z":
            out.append("S")
        elif c in "FJLMNR":
            out.append(c)
        # Vowels past the first letter are dropped.

        i += skip

    code = "".join(out)
    return code if max_length is None else code[:max_length]


def levenshtein(a: str, b: str) -> int:
    """Minimal unit-cost edit count (insert/delete/substitute) between a and b."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def mphone_distance(a: str, b: str) -> int:
    """Levenshtein distance between the Metaphone codes of two words."""
    return levenshtein(metaphone(a), metaphone(b))


@dataclass(frozen=True)
class EditOp:
    """One contiguous edit region: standard[position:position+len(source)] -> target."""

    kind: str  # "sub" | "ins" | "del"
    source: str
    target: str
    position: int

    @property
    def merged(self) -> str:
        if self.kind == "del":
            return f"-{self.source}"
        if self.kind == "ins":
            return f"+{self.target}"
        return f"{self.source}->{self.target}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "source": self.source,
            "target": self.target,
            "position": self.position,
        }


@dataclass(frozen=True)
class EditSignature:
    """Merged edit script turning a standard form into an observed form."""

    standard: str
    observed: str
    ops: tuple[EditOp, ...]

    @property
    def merged(self) -> str:
        return ",".join(op.merged for op in self.ops)

    def replay(self) -> str:
        """Apply the ops to the standard form; must reproduce the observed form."""
        result = self.standard
        for op in sorted(self.ops, key=lambda o: o.position, reverse=True):
            result = result[: op.position] + op.target + result[op.position + len(op.source) :]
        return result

    def to_dict(self) -> dict:
        return {"merged": self.merged, "ops": [op.to_dict() for op in self.ops]}


def edit_signature(standard: str, observed: str) -> EditSignature:
    """Extract the merged edit ops of one minimal-cost alignment.

    Tie-breaking is fixed (substitution preferred over insertion over
    deletion, backtraced from the end) so signatures are reproducible.
    Adjacent edited positions merge into one multi-character op, so
    after/aftah yields a single ``er->ah`` rather than two substitutions.
    """
    m, n = len(standard), len(observed)
    dist = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        dist[i][0] = i
    for j in range(n + 1):
        dist[0][j] = j
    for i in range(1, m + 1):
        ca = standard[i - 1]
        row = dist[i]
        above = dist[i - 1]
        for j in range(1, n + 1):
            row[j] = min(
                above[j] + 1,
                row[j - 1] + 1,
                above[j - 1] + (ca != observed[j - 1]),
            )

    # Backtrace into alignment columns of (standard char | "", observed char | "").
    columns: list[tuple[str, str]] = []
    i, j = m, n
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (standard[i - 1] != observed[j - 1]):
            columns.append((standard[i - 1], observed[j - 1]))
            i -= 1
            j -= 1
        elif j > 0 and dist[i][j] == dist[i][j - 1] + 1:
            columns.append(("", observed[j - 1]))
            j -= 1
        else:
            columns.append((standard[i - 1], ""))
            i -= 1
    columns.reverse()

    # Merge contiguous non-matching columns into multi-character ops.
    ops: list[EditOp] = []
    std_pos = 0
    run_src: list[str] = []
    run_tgt: list[str] = []
    run_start = 0

    def flush() -> None:
        if not run_src and not run_tgt:
            return
        source = "".join(run_src)
        target = "".join(run_tgt)
        kind = "sub" if source and target else ("del" if source else "ins")
        ops.append(EditOp(kind=kind, source=source, target=target, position=run_start))
        run_src.clear()
        run_tgt.clear()

    for src, tgt in columns:
        if src == tgt:  # match column
            flush()
            std_pos += 1
            run_start = std_pos
        else:
            if not run_src and not run_tgt:
                run_start = std_pos
            run_src.append(src)
            run_tgt.append(tgt)
            if src:
                std_pos += 1
    flush()

    return EditSignature(standard=standard, observed=observed, ops=tuple(ops))
