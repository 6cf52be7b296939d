"""Single-character WordPiece encoding for the forced-character BERT mode.

Encodes any input using only single-character pieces from the wrapped
tokenizer's vocabulary, so a subword architecture sees strictly
character-granular input.  Characters with no single-character piece map to
the unknown piece and the affected record is flagged by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class ForcedEncoding:
    ids: list[int]  # includes [CLS] ... [SEP]
    offsets: list[tuple[int, int]]  # per id; (0, 0) for specials
    unknown_positions: list[int]  # character offsets that hit [UNK]


class ForcedCharEncoder:
    def __init__(self, tokenizer):
        vocab = tokenizer.get_vocab()
        self.cls_id = tokenizer.cls_token_id
        self.sep_id = tokenizer.sep_token_id
        self.unk_id = tokenizer.unk_token_id
        if None in (self.cls_id, self.sep_id, self.unk_id):
            raise ValueError("tokenizer lacks CLS/SEP/UNK tokens needed for forced encoding")
        self.word_start = {t: i for t, i in vocab.items() if len(t) == 1}
        self.continuation = {t[2:]: i for t, i in vocab.items() if t.startswith("##") and len(t) == 3}

    def encode(self, text: str) -> ForcedEncoding:
        """Lowercased single-character piece ids with per-piece char offsets."""
        ids = [self.cls_id]
        offsets: list[tuple[int, int]] = [(0, 0)]
        unknown: list[int] = []
        word_start = True
        for position, char in enumerate(text.lower()):
            if char.isspace():
                word_start = True
                continue
            table = self.word_start if word_start else self.continuation
            piece_id = table.get(char)
            if piece_id is None:
                piece_id = self.unk_id
                unknown.append(position)
            ids.append(piece_id)
            offsets.append((position, position + 1))
            word_start = False
        ids.append(self.sep_id)
        offsets.append((0, 0))
        return ForcedEncoding(ids=ids, offsets=offsets, unknown_positions=unknown)
