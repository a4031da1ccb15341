"""Translation adapter registry.

Pluggable translators map (source language, target language) pairs;
identity pairs always resolve.  Two reference adapters: identity and a
word-dictionary adapter loaded from a TSV of ``source<TAB>target`` lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol


class UnsupportedLanguagePair(ValueError):
    def __init__(self, src: str, tgt: str, available: list[tuple[str, str]]):
        self.src = src
        self.tgt = tgt
        self.available = sorted(available)
        pairs = ", ".join(f"{s}->{t}" for s, t in self.available) or "none"
        super().__init__(
            f"unsupported language pair {src}->{tgt}; available: {pairs}")


class Translator(Protocol):
    def translate(self, text: str) -> str: ...


class IdentityTranslator:
    def translate(self, text: str) -> str:
        return text


class DictionaryTranslator:
    """Whitespace-token word map; unknown words pass through unchanged."""

    def __init__(self, mapping: dict[str, str]):
        self.mapping = dict(mapping)

    def translate(self, text: str) -> str:
        return " ".join(self.mapping.get(w, w) for w in text.split())

    @classmethod
    def from_tsv(cls, path) -> "DictionaryTranslator":
        mapping: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(
                        f"{path}: line {lineno}: expected source<TAB>target")
                mapping[parts[0]] = parts[1]
        return cls(mapping)


@dataclass
class TranslatorRegistry:
    adapters: dict[tuple[str, str], Translator] = field(default_factory=dict)

    def register(self, src: str, tgt: str, adapter: Translator) -> None:
        self.adapters[(src.lower(), tgt.lower())] = adapter

    def pairs(self) -> list[tuple[str, str]]:
        return sorted(self.adapters)

    def translate(self, text: str, src: str, tgt: str) -> str:
        src, tgt = src.lower(), tgt.lower()
        if src == tgt:
            return text
        adapter = self.adapters.get((src, tgt))
        if adapter is None:
            raise UnsupportedLanguagePair(src, tgt, self.pairs())
        return adapter.translate(text)


def default_registry() -> TranslatorRegistry:
    return TranslatorRegistry()
