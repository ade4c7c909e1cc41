from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from puda.taxonomy import (
    CategoryPath,
    DuplicatePath,
    EmptyTaxonomy,
    MalformedLine,
    OrphanPath,
    load_taxonomy,
    project_tier,
    serialize_taxonomy,
    validate_subset,
)


class TestCategoryPath:
    def test_canonical_form(self):
        path = CategoryPath.parse("/Travel/Hotels & Accommodations")
        assert path.segments == ("Travel", "Hotels & Accommodations")
        assert path.canonical == "/Travel/Hotels & Accommodations"
        assert path.depth == 2
        assert path.parent == CategoryPath.parse("/Travel")

    def test_parse_trims_and_normalizes(self):
        assert CategoryPath.parse("  /Travel \n").canonical == "/Travel"

    def test_rejects_non_rooted(self):
        with pytest.raises(ValueError):
            CategoryPath.parse("Travel/Hotels")

    def test_rejects_depth_beyond_three(self):
        with pytest.raises(ValueError):
            CategoryPath.parse("/a/b/c/d")

    def test_rejects_empty_segment(self):
        with pytest.raises(ValueError):
            CategoryPath.parse("/Travel//Hotels")


class TestLoadTaxonomy:
    def test_shipped_sample_counts(self, taxonomy):
        assert taxonomy.tier_counts == (26, 256, 810)

    def test_single_root(self):
        assert load_taxonomy("/Travel\n").tier_counts == (1, 0, 0)

    def test_orphan_detected(self):
        with pytest.raises(OrphanPath) as exc:
            load_taxonomy("/Travel/Hotels\n")
        assert exc.value.missing_prefix == "/Travel"

    def test_duplicate_detected(self):
        with pytest.raises(DuplicatePath):
            load_taxonomy("/Travel\n/Travel\n")

    def test_malformed_line_numbered(self):
        with pytest.raises(MalformedLine) as exc:
            load_taxonomy("/Travel\nnot-a-path\n")
        assert exc.value.line_no == 2

    def test_empty_file_rejected(self):
        with pytest.raises(EmptyTaxonomy):
            load_taxonomy("# only comments\n\n")

    def test_comments_and_blanks_ignored(self):
        loaded = load_taxonomy("# header\n\n/Travel\n  \n/Travel/Hotels\n")
        assert loaded.tier_counts == (2 - 1, 1, 0)

    def test_load_is_idempotent(self, taxonomy):
        reloaded = load_taxonomy(serialize_taxonomy(taxonomy))
        assert reloaded == taxonomy


class TestProjectTier:
    def test_sample_tier_sizes(self, taxonomy):
        assert len(project_tier(taxonomy, 1)) == 26
        assert len(project_tier(taxonomy, 2)) == 256
        assert len(project_tier(taxonomy, 3)) == 810

    def test_partition(self, taxonomy):
        total = sum(len(project_tier(taxonomy, tier)) for tier in (1, 2, 3))
        assert total == len(taxonomy.paths)

    def test_missing_depth_empty(self):
        assert project_tier(load_taxonomy("/A\n"), 3) == ()

    def test_bad_tier_rejected(self, taxonomy):
        with pytest.raises(ValueError):
            project_tier(taxonomy, 0)


class TestValidateSubset:
    def test_drops_inventions(self, taxonomy):
        kept = validate_subset(
            taxonomy, ["/Travel/Hotels & Accommodations", "/Invented/Nonsense"], tier=2
        )
        assert [p.canonical for p in kept] == ["/Travel/Hotels & Accommodations"]

    def test_empty_input(self, taxonomy):
        assert validate_subset(taxonomy, [], tier=1) == []

    def test_dedup_preserving_order(self, taxonomy):
        kept = validate_subset(taxonomy, ["/Travel", "/Travel", "/Sports"], tier=1)
        assert [p.canonical for p in kept] == ["/Travel", "/Sports"]

    def test_wrong_tier_dropped(self, taxonomy):
        assert validate_subset(taxonomy, ["/Travel"], tier=2) == []

    def test_exact_match_no_case_folding(self, taxonomy):
        assert validate_subset(taxonomy, ["/travel"], tier=1) == []

    @given(
        st.lists(
            st.one_of(
                st.text(max_size=40),
                st.sampled_from(
                    [
                        "/Travel",
                        "/Travel/Hotels & Accommodations",
                        "/Sports/Golf",
                        "/../../etc/passwd",
                        "/Travel/Hotels & Accommodations/../..",
                        "\x00/Travel",
                        "/Traveĺ",
                        "'; DROP TABLE categories; --",
                    ]
                ),
            ),
            max_size=30,
        ),
        st.sampled_from([1, 2, 3]),
    )
    def test_result_always_subset_of_tier(self, candidates, tier):
        taxonomy = load_taxonomy(
            "/Travel\n/Sports\n/Travel/Hotels & Accommodations\n/Sports/Golf\n"
            "/Sports/Golf/Equipment & Gear\n"
        )
        kept = validate_subset(taxonomy, candidates, tier)
        allowed = {p.canonical for p in project_tier(taxonomy, tier)}
        assert {p.canonical for p in kept} <= allowed
        assert len({p.canonical for p in kept}) == len(kept)
