"""Identifier codec tests: numeral table, supplier registry, round trips."""

import random

import pytest

from citegraph.errors import (
    AmbiguousPrefix,
    BadLocalId,
    LeadingZeroBody,
    MalformedOci,
    MalformedPrefix,
    OddLengthBody,
    UnknownPrefix,
    UnsupportedCharacter,
)
from citegraph.oci import CodecKind, NumeralTable, SupplierRegistry, register_from_lines

# Printed in full in the source material: the canonical Crossref-side
# identifiers for DOIs 10.1186/1756-8722-6-59 and 10.1186/1756-8722-5-31.
CROSSREF_CITING = "02001010806360107050663080702026306630509"
CROSSREF_CITED = "02001010806360107050663080702026305630301"
CROSSREF_OCI = f"oci:{CROSSREF_CITING}-{CROSSREF_CITED}"

OCC_OCI = "oci:0302544384-0307295288"


@pytest.fixture
def registry():
    return SupplierRegistry()


class TestNumeralTable:
    def test_fixed_entries(self):
        table = NumeralTable.default()
        for d in "0123456789":
            assert table.encode_char(d) == "0" + d
        assert table.encode_char("/") == "36"
        assert table.encode_char("-") == "63"

    def test_bijective_two_digit(self):
        table = NumeralTable.default()
        chars = table.characters()
        codes = [table.encode_char(ch) for ch in chars]
        assert len(set(codes)) == len(codes)
        assert all(len(c) == 2 and c.isdigit() for c in codes)
        for ch, code in zip(chars, codes):
            assert table.decode_code(code) == ch

    def test_letters_follow_digits(self):
        table = NumeralTable.default()
        assert table.encode_char("a") == "10"
        assert table.encode_char("z") == "35"
        assert table.encode_char(".") == "37"
        assert table.encode_char("^") == "62"

    def test_duplicate_code_rejected(self):
        with pytest.raises(ValueError):
            NumeralTable({"a": "10", "b": "10"})

    def test_unsupported_character(self):
        table = NumeralTable.default()
        with pytest.raises(UnsupportedCharacter):
            table.encode_char("é")


class TestRegistry:
    def test_builtins_present(self, registry):
        crossref = registry.by_prefix("020")
        occ = registry.by_prefix("030")
        assert crossref.codec_kind is CodecKind.PAIRED_TABLE
        assert crossref.scheme == "doi"
        assert occ.codec_kind is CodecKind.VERBATIM_NUMERIC

    def test_register_new_supplier(self, registry):
        entry = registry.register("040", "wd", CodecKind.VERBATIM_NUMERIC, "wikidata")
        assert registry.by_prefix("040") is entry

    @pytest.mark.parametrize("bad", ["21", "0", "020x", "02", "1020", "0 20", ""])
    def test_malformed_prefix(self, registry, bad):
        with pytest.raises(MalformedPrefix):
            registry.register(bad, "x", CodecKind.VERBATIM_NUMERIC, "x")

    def test_multi_group_prefix_allowed(self, registry):
        # the pattern admits prefixes with several zero-terminated groups
        entry = registry.register("04050", "multi", CodecKind.VERBATIM_NUMERIC, "x")
        assert registry.decode_local("040501") == (entry, "1")

    def test_multi_group_collision_rejected(self, registry):
        # "02030" is headed by the registered "020"
        with pytest.raises(AmbiguousPrefix):
            registry.register("02030", "multi", CodecKind.VERBATIM_NUMERIC, "x")

    def test_prefix_free(self, registry):
        with pytest.raises(AmbiguousPrefix):
            registry.register("0200", "y", CodecKind.VERBATIM_NUMERIC, "x")
        with pytest.raises(AmbiguousPrefix):
            registry.register("020", "again", CodecKind.PAIRED_TABLE, "doi")

    def test_registry_lines(self, registry):
        added = register_from_lines(registry, [
            "# extra suppliers",
            "",
            "040,wikidata,verbatim-numeric,wikidata",
        ])
        assert [e.prefix for e in added] == ["040"]
        with pytest.raises(MalformedPrefix):
            register_from_lines(registry, ["050,x,bogus-codec,x"])


class TestEncodeDecode:
    def test_paper_crossref_encoding(self, registry):
        assert registry.encode_local("020", "10.1186/1756-8722-6-59") == CROSSREF_CITING
        assert registry.encode_local("020", "10.1186/1756-8722-5-31") == CROSSREF_CITED

    def test_paper_occ_encoding(self, registry):
        assert registry.encode_local("030", "2544384") == "0302544384"

    def test_derived_symbol_encoding(self, registry):
        # suffix "1000/a-1" spelled out: 01 00 00 00 36 10 63 01
        assert registry.encode_local("020", "10.1000/a-1") == "0200100000036106301"

    def test_doi_head_and_case_folded(self, registry):
        assert registry.encode_local("020", "doi:10.1000/A-1") == "0200100000036106301"

    def test_paper_crossref_decoding(self, registry):
        entry, local = registry.decode_local(CROSSREF_CITED)
        assert entry.prefix == "020"
        assert local == "10.1186/1756-8722-5-31"

    def test_paper_occ_decoding(self, registry):
        entry, local = registry.decode_local("0307295288")
        assert (entry.prefix, local) == ("030", "7295288")

    def test_decode_errors(self, registry):
        with pytest.raises(LeadingZeroBody):
            registry.decode_local("0300123")
        with pytest.raises(LeadingZeroBody):
            registry.decode_local("030")
        with pytest.raises(OddLengthBody):
            registry.decode_local("020123")
        with pytest.raises(UnknownPrefix):
            registry.decode_local("990")
        with pytest.raises(UnknownPrefix):
            registry.decode_local("not numerals")

    def test_encode_errors(self, registry):
        with pytest.raises(BadLocalId):
            registry.encode_local("020", "11.1000/x")
        with pytest.raises(BadLocalId):
            registry.encode_local("030", "0123")
        with pytest.raises(BadLocalId):
            registry.encode_local("030", "12a")
        with pytest.raises(UnsupportedCharacter):
            registry.encode_local("020", "10.1000/café")


class TestOci:
    def test_paper_occ_oci(self, registry):
        oci = registry.build_oci(("030", "2544384"), ("030", "7295288"))
        assert oci.canonical_text == OCC_OCI

    def test_paper_crossref_oci(self, registry):
        oci = registry.build_oci(
            ("020", "10.1186/1756-8722-6-59"), ("020", "10.1186/1756-8722-5-31")
        )
        assert oci.canonical_text == CROSSREF_OCI

    def test_self_loop_permitted(self, registry):
        oci = registry.build_oci(("030", "1"), ("030", "1"))
        assert oci.canonical_text == "oci:0301-0301"

    def test_parse_with_scheme(self, registry):
        oci = registry.parse_oci(OCC_OCI)
        assert (oci.citing.supplier.prefix, oci.citing.local_id) == ("030", "2544384")
        assert (oci.cited.supplier.prefix, oci.cited.local_id) == ("030", "7295288")

    def test_parse_without_scheme_canonicalizes(self, registry):
        oci = registry.parse_oci("0302544384-0307295288")
        assert oci.canonical_text == OCC_OCI

    def test_parse_malformed(self, registry):
        for bad in ["oci:abc-0301", "oci:0301", "oci:0301-0302-0303", "", "oci:-"]:
            with pytest.raises(MalformedOci):
                registry.parse_oci(bad)

    def test_parse_reports_failing_side(self, registry):
        with pytest.raises(LeadingZeroBody, match="cited side"):
            registry.parse_oci("oci:0301-0300")
        with pytest.raises(UnknownPrefix, match="citing side"):
            registry.parse_oci("oci:990-0301")

    def test_full_round_trip(self, registry):
        parsed = registry.parse_oci(CROSSREF_OCI)
        rebuilt = registry.build_oci(
            (parsed.citing.supplier, parsed.citing.local_id),
            (parsed.cited.supplier, parsed.cited.local_id),
        )
        assert rebuilt.canonical_text == CROSSREF_OCI
        assert rebuilt == parsed

    def test_numerals_property(self, registry):
        oci = registry.parse_oci(OCC_OCI)
        assert oci.numerals == "0302544384-0307295288"


def random_doi(rng: random.Random, alphabet: str) -> str:
    length = rng.randint(1, 64)
    return "10." + "".join(rng.choice(alphabet) for _ in range(length))


def test_random_doi_round_trip(registry):
    """Random DOIs over the table alphabet survive encode -> decode."""
    alphabet = registry.table.characters()
    for seed in range(200):
        rng = random.Random(seed)
        doi = random_doi(rng, alphabet)
        entry, decoded = registry.decode_local(registry.encode_local("020", doi))
        assert entry.prefix == "020"
        assert decoded == doi


def test_random_corpus_number_round_trip(registry):
    for seed in range(200):
        rng = random.Random(1000 + seed)
        number = str(rng.randint(1, 10**12))
        entry, decoded = registry.decode_local(registry.encode_local("030", number))
        assert (entry.prefix, decoded) == ("030", number)
