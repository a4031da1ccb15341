import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vernqa.langbridge import (
    DictionaryTranslator,
    IdentityTranslator,
    TranslatorRegistry,
    UnsupportedLanguagePair,
)


class TestRegistry:
    def test_identity_pair_always_resolves(self):
        reg = TranslatorRegistry()
        assert reg.translate("fever", "en", "en") == "fever"

    def test_unregistered_pair_error_lists_available(self):
        reg = TranslatorRegistry()
        reg.register("es", "en", IdentityTranslator())
        reg.register("hi", "en", IdentityTranslator())
        with pytest.raises(UnsupportedLanguagePair) as e:
            reg.translate("fever", "en", "xx")
        assert e.value.available == [("es", "en"), ("hi", "en")]
        assert "es->en" in str(e.value)

    def test_register_then_translate(self):
        reg = TranslatorRegistry()
        reg.register("es", "en", DictionaryTranslator({"hola": "hello"}))
        assert reg.translate("hola doctor", "es", "en") == "hello doctor"

    def test_reregister_latest_wins(self):
        reg = TranslatorRegistry()
        reg.register("es", "en", DictionaryTranslator({"hola": "hi"}))
        reg.register("es", "en", DictionaryTranslator({"hola": "hello"}))
        assert reg.translate("hola", "es", "en") == "hello"

    def test_tags_case_insensitive(self):
        reg = TranslatorRegistry()
        reg.register("ES", "en", DictionaryTranslator({"hola": "hello"}))
        assert reg.translate("hola", "es", "EN") == "hello"

    @given(st.text(max_size=50), st.sampled_from(["en", "es", "hi", "xx"]))
    @settings(max_examples=50, deadline=None)
    def test_identity_law(self, text, lang):
        assert TranslatorRegistry().translate(text, lang, lang) == text


class TestDictionaryTranslator:
    def test_word_map_hand_applied(self):
        t = DictionaryTranslator({"hola": "hello", "fiebre": "fever"})
        assert t.translate("hola doctor tengo fiebre") == "hello doctor tengo fever"

    def test_position_preserving(self):
        t = DictionaryTranslator({"a": "x", "b": "y"})
        assert t.translate("a b a") == "x y x"

    def test_idempotent_when_injective_out_of_domain(self):
        t = DictionaryTranslator({"hola": "hello"})
        once = t.translate("hola doctor")
        assert t.translate(once) == once

    def test_from_tsv(self, tmp_path):
        p = tmp_path / "es_en.tsv"
        p.write_text("# comment\nhola\thello\nfiebre\tfever\n")
        t = DictionaryTranslator.from_tsv(p)
        assert t.translate("hola fiebre") == "hello fever"

    def test_malformed_tsv_rejected(self, tmp_path):
        p = tmp_path / "bad.tsv"
        p.write_text("just one column\n")
        with pytest.raises(ValueError, match="line 1"):
            DictionaryTranslator.from_tsv(p)
