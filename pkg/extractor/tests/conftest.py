import json
from pathlib import Path

import pytest
import torch
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
from transformers import (
    BertConfig,
    BertModel,
    CanineConfig,
    CanineModel,
    PreTrainedTokenizerFast,
)

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
CHARS = list("abcdefghijklmnopqrstuvwxyz'")
WHOLE_WORDS = ["the", "said", "he", "and", "down", "road", "went", "on", "dark"]

LEXICON = [
    "after", "rather", "quarters", "blooming", "hunters", "poem", "falls",
    "circus", "morning", "evening", "said", "weather", "mountain", "golden",
    "river", "thunder", "window", "garden", "silver", "country",
]


def build_wordpiece_tokenizer() -> PreTrainedTokenizerFast:
    vocab_tokens = SPECIALS + CHARS + ["##" + c for c in CHARS] + WHOLE_WORDS
    vocab = {tok: i for i, tok in enumerate(vocab_tokens)}
    wordpiece = models.WordPiece(vocab, unk_token="[UNK]", max_input_chars_per_word=100)
    tokenizer = Tokenizer(wordpiece)
    tokenizer.normalizer = normalizers.BertNormalizer(lowercase=True)
    tokenizer.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tokenizer.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )


@pytest.fixture(scope="session")
def tiny_bert_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("tiny-bert")
    tokenizer = build_wordpiece_tokenizer()
    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=tokenizer.vocab_size,
        hidden_size=32,
        num_hidden_layers=4,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=128,
    )
    model = BertModel(config)
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    return out


@pytest.fixture(scope="session")
def tiny_canine_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("tiny-canine")
    torch.manual_seed(5678)
    config = CanineConfig(
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=64,
    )
    model = CanineModel(config)
    model.save_pretrained(out)
    return out


def simple_variants(standard: str, observed: str) -> dict[str, str]:
    """Deterministic, distinct-from-standard synthetic forms for fixtures."""
    swap = standard[1] + standard[0] + standard[2:] if len(standard) > 1 else standard + "x"
    mutate = standard[:-1] + ("q" if standard[-1] != "q" else "z")
    confuse = ("x" if standard[0] != "x" else "k") + standard[1:]
    return {
        "std": standard,
        "obv": observed,
        "rev": standard[::-1],
        "ocr": confuse,
        "swp": swap,
        "rnd": mutate,
    }


def write_corpus(root: Path, n: int = 20) -> dict[str, Path]:
    dataset_path = root / "dataset.jsonl"
    variants_path = root / "variants.jsonl"
    with open(dataset_path, "w", encoding="utf-8") as data_fh, open(
        variants_path, "w", encoding="utf-8"
    ) as var_fh:
        for i in range(n):
            standard = LEXICON[i % len(LEXICON)]
            observed = standard[:-1] + "ah" if not standard.endswith("h") else standard + "a"
            prefix = "he said "
            context = f"{prefix}{observed} and went down the road"
            data_fh.write(
                json.dumps(
                    {
                        "id": f"dp{i:04d}",
                        "standard": standard,
                        "observed": observed,
                        "context": context,
                        "dtag": ["AA", "BW", "WS", "GA", "DE"][i % 5],
                        "target_offset": len(prefix),
                    }
                )
                + "\n"
            )
            for kind, form in simple_variants(standard, observed).items():
                var_fh.write(
                    json.dumps({"id": f"dp{i:04d}", "kind": kind, "form": form, "degenerate": False})
                    + "\n"
                )
    return {"dataset": dataset_path, "variants": variants_path}


@pytest.fixture(scope="session")
def corpus_files(tmp_path_factory) -> dict[str, Path]:
    return write_corpus(tmp_path_factory.mktemp("corpus"), n=20)
