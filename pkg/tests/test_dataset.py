import pytest
from hypothesis import given
from hypothesis import strategies as st

from rttqe.dataset import (
    Corpus,
    LanguageSpec,
    align_parallel,
    enumerate_pairs,
    load_corpus,
    load_registry,
    save_corpus,
    save_registry,
)
from rttqe.validation import ValidationError


def registry(p, q):
    return [LanguageSpec(f"t{i}", "high", "train+test") for i in range(p)] + \
           [LanguageSpec(f"x{i}", "low", "test") for i in range(q)]


class TestLoadCorpus:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_bytes(b"")
        assert len(load_corpus(path, "en")) == 0

    def test_three_lines(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("one\ntwo\nthree\n", encoding="utf-8")
        assert load_corpus(path, "en").segments == ("one", "two", "three")

    def test_trailing_newline_optional(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("one\ntwo", encoding="utf-8")
        assert load_corpus(path, "en").segments == ("one", "two")

    def test_bom_and_crlf(self, tmp_path):
        plain = tmp_path / "plain.txt"
        plain.write_bytes("héllo\nwörld\n".encode("utf-8"))
        variant = tmp_path / "variant.txt"
        variant.write_bytes(b"\xef\xbb\xbf" + "héllo\r\nwörld\r\n".encode("utf-8"))
        assert load_corpus(plain, "de").segments == load_corpus(variant, "de").segments

    def test_nfc(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("café\n", encoding="utf-8")
        assert load_corpus(path, "fr").segments == ("café",)

    def test_invalid_utf8_names_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_bytes(b"ok\nfine\n\xff\xfe broken\n")
        with pytest.raises(ValidationError, match="line 3"):
            load_corpus(path, "en")

    @given(st.lists(st.text(alphabet=st.characters(blacklist_categories=("Cs", "Zl", "Zp", "Cc")), max_size=20),
                    max_size=10))
    def test_save_load_idempotent(self, tmp_path_factory, segments):
        import unicodedata
        segments = [unicodedata.normalize("NFC", s) for s in segments]
        path = tmp_path_factory.mktemp("c") / "c.txt"
        corpus = Corpus("xx", tuple(segments))
        save_corpus(corpus, path)
        assert load_corpus(path, "xx") == corpus


class TestAlign:
    def test_five_pairs(self):
        a = Corpus("en", tuple(f"a{i}" for i in range(5)))
        b = Corpus("de", tuple(f"b{i}" for i in range(5)))
        parallel = align_parallel(a, b)
        assert parallel.pairs == [(f"a{i}", f"b{i}") for i in range(5)]

    def test_length_mismatch(self):
        a = Corpus("en", tuple("abcde"))
        b = Corpus("de", tuple("abcd"))
        with pytest.raises(ValidationError, match=r"\(5, 4\)"):
            align_parallel(a, b)

    def test_self_alignment(self):
        a = Corpus("en", ("x", "y"))
        assert align_parallel(a, a).pairs == [("x", "x"), ("y", "y")]


class TestPartition:
    def test_bundled_registry(self):
        reg = load_registry()
        assert len(reg) == 33
        assert enumerate_pairs(reg).counts == (380, 520, 156)

    @pytest.mark.parametrize("p, q, expected", [
        (20, 13, (380, 520, 156)),
        (1, 0, (0, 0, 0)),
        (2, 2, (2, 8, 2)),
    ])
    def test_counts(self, p, q, expected):
        assert enumerate_pairs(registry(p, q)).counts == expected

    @given(st.integers(0, 12), st.integers(0, 12))
    def test_closed_form(self, p, q):
        if p + q == 0:
            return
        part = enumerate_pairs(registry(p, q))
        n1, n2, n3 = part.counts
        assert (n1, n2, n3) == (p * (p - 1), 2 * p * q, q * (q - 1))
        assert n1 + n2 + n3 == (p + q) * (p + q - 1)
        all_pairs = set(part.type1) | set(part.type2) | set(part.type3)
        assert len(all_pairs) == n1 + n2 + n3

    def test_directed(self):
        part = enumerate_pairs(registry(2, 0))
        assert set(part.type1) == {("t0", "t1"), ("t1", "t0")}
        assert part.type_of(("t0", "t1")) == "I"

    def test_duplicates_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            enumerate_pairs([LanguageSpec("en"), LanguageSpec("en")])

    def test_registry_csv_round_trip(self, tmp_path):
        reg = registry(3, 2)
        path = tmp_path / "reg.csv"
        save_registry(reg, path)
        assert path.read_text().splitlines()[0] == "code,resource,usage"
        assert load_registry(path) == reg
