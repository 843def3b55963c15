"""Seq2seq model over text-to-marker pairs: tokenizer, training, decoding.

The default "base model" is a tiny randomly initialized BART-style
configuration trained from scratch — desk-scale acceptance only needs a
model that can memorize its training pairs. A real pretrained checkpoint
can be supplied via FineTuneConfig.base_model; scale is configuration, not
contract.
"""

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import torch
from tokenizers import Tokenizer
from tokenizers.models import WordLevel
from tokenizers.pre_tokenizers import WhitespaceSplit
from transformers import (
    AutoTokenizer,
    BartConfig,
    BartForConditionalGeneration,
    PreTrainedTokenizerFast,
)

from order_bench_adapter.encoding import BEGIN_TOKEN, END_TOKEN, TrainingPair, derive_seed

PAD, BOS, EOS, UNK = "<pad>", "<s>", "</s>", "<unk>"


def default_marker_tokens() -> tuple[str, ...]:
    """Atomic special tokens: framing tokens plus every sentence-marker label
    the random marker mode can emit."""
    return (BEGIN_TOKEN, END_TOKEN) + tuple(f"<S{k}>" for k in range(101))


@dataclass(frozen=True)
class FineTuneConfig:
    base_model: Optional[str] = None  # None = tiny random init, trained from scratch
    epochs: int = 200
    learning_rate: float = 3e-4
    batch_size: int = 8
    seed: int = 0
    marker_tokens: tuple[str, ...] = field(default_factory=default_marker_tokens)

    def to_json(self) -> dict:
        return {
            "base_model": self.base_model,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "marker_tokens": list(self.marker_tokens),
        }


def build_tokenizer(pairs: Sequence[TrainingPair],
                    config: FineTuneConfig) -> PreTrainedTokenizerFast:
    """Whitespace word-level tokenizer over the pair texts.

    Marker tokens are registered as specials so they stay atomic and exist
    in the vocabulary even when unseen in training; the same goes for every
    integer label the codec can emit.
    """
    vocab: dict[str, int] = {}
    for token in (PAD, BOS, EOS, UNK, *config.marker_tokens,
                  *(str(k) for k in range(101))):
        vocab.setdefault(token, len(vocab))
    words = sorted({w for p in pairs for w in f"{p.text} {p.target}".split()})
    for word in words:
        vocab.setdefault(word, len(vocab))
    tok = Tokenizer(WordLevel(vocab, unk_token=UNK))
    tok.pre_tokenizer = WhitespaceSplit()
    wrapped = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        pad_token=PAD, bos_token=BOS, eos_token=EOS, unk_token=UNK,
    )
    wrapped.add_special_tokens(
        {"additional_special_tokens": list(config.marker_tokens)}
    )
    return wrapped


def _init_model(config: FineTuneConfig, tokenizer) -> BartForConditionalGeneration:
    if config.base_model is not None:
        model = BartForConditionalGeneration.from_pretrained(config.base_model)
        model.resize_token_embeddings(len(tokenizer))
        return model
    cfg = BartConfig(
        vocab_size=len(tokenizer),
        d_model=128,
        encoder_layers=2, decoder_layers=2,
        encoder_attention_heads=4, decoder_attention_heads=4,
        encoder_ffn_dim=256, decoder_ffn_dim=256,
        max_position_embeddings=512,
        dropout=0.0, attention_dropout=0.0, activation_dropout=0.0,
        pad_token_id=tokenizer.pad_token_id,
        bos_token_id=tokenizer.bos_token_id,
        eos_token_id=tokenizer.eos_token_id,
        decoder_start_token_id=tokenizer.bos_token_id,
        forced_eos_token_id=None,
    )
    return BartForConditionalGeneration(cfg)


def load_base_tokenizer(config: FineTuneConfig) -> PreTrainedTokenizerFast:
    tokenizer = AutoTokenizer.from_pretrained(config.base_model)
    tokenizer.add_special_tokens(
        {"additional_special_tokens": list(config.marker_tokens)}
    )
    return tokenizer


def _encode_rows(pairs, tokenizer):
    eos = tokenizer.eos_token_id
    rows = []
    for p in pairs:
        src = tokenizer(p.text, add_special_tokens=False).input_ids + [eos]
        tgt = tokenizer(p.target, add_special_tokens=False).input_ids + [eos]
        rows.append((src, tgt))
    return rows


def _pad_batch(rows, pad_id):
    src_len = max(len(s) for s, _ in rows)
    tgt_len = max(len(t) for _, t in rows)
    input_ids, attention, labels = [], [], []
    for src, tgt in rows:
        input_ids.append(src + [pad_id] * (src_len - len(src)))
        attention.append([1] * len(src) + [0] * (src_len - len(src)))
        labels.append(tgt + [-100] * (tgt_len - len(tgt)))  # -100 = ignored by the loss
    return (torch.tensor(input_ids), torch.tensor(attention), torch.tensor(labels))


def fine_tune(pairs: Sequence[TrainingPair], config: FineTuneConfig,
              out_dir: Union[str, Path]) -> list[float]:
    """Train on the pairs, save the artifact, return per-epoch mean losses."""
    if not pairs:
        raise ValueError("cannot fine-tune on an empty pair list")
    torch.manual_seed(derive_seed("adapter-train", config.seed))
    if config.base_model is not None:
        tokenizer = load_base_tokenizer(config)
    else:
        tokenizer = build_tokenizer(pairs, config)
    model = _init_model(config, tokenizer)
    model.train()
    rows = _encode_rows(pairs, tokenizer)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    losses = []
    for epoch in range(config.epochs):
        order = list(range(len(rows)))
        random.Random(derive_seed("adapter-order", config.seed, str(epoch))).shuffle(order)
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [rows[i] for i in order[start:start + config.batch_size]]
            input_ids, attention, labels = _pad_batch(batch, tokenizer.pad_token_id)
            loss = model(input_ids=input_ids, attention_mask=attention,
                         labels=labels).loss
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += loss.item() * len(batch)
        losses.append(total / len(rows))
    save_artifact(model, tokenizer, config, losses, out_dir)
    return losses


def save_artifact(model, tokenizer, config: FineTuneConfig,
                  losses: Sequence[float], out_dir: Union[str, Path]) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    payload = {"config": config.to_json(), "losses": list(losses)}
    (out_dir / "training.json").write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )


def load_artifact(model_dir: Union[str, Path]):
    model_dir = Path(model_dir)
    tokenizer = PreTrainedTokenizerFast.from_pretrained(model_dir)
    model = BartForConditionalGeneration.from_pretrained(model_dir)
    model.eval()
    return tokenizer, model


@torch.no_grad()
def greedy_decode(tokenizer, model, text: str, max_new_tokens: int) -> str:
    """Deterministic greedy generation; returns the raw decoded string."""
    src = tokenizer(text, add_special_tokens=False).input_ids
    src = src + [tokenizer.eos_token_id]
    out = model.generate(
        input_ids=torch.tensor([src]),
        attention_mask=torch.ones(1, len(src), dtype=torch.long),
        max_new_tokens=max_new_tokens,
        num_beams=1,
        do_sample=False,
    )
    return tokenizer.decode(out[0], skip_special_tokens=True)
