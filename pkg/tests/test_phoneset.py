import numpy as np
import pytest

from phoneval.phoneset import (
    CyclicRules,
    DuplicateSegment,
    EmptyMultiphthong,
    FeatureTable,
    MalformedFeatureCell,
    MalformedRow,
    UnknownSegment,
    collapse_table,
    load_feature_table,
    load_rules,
    lookup,
    normalize_segment,
    split_multiphthong,
    string_to_vector,
)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(row + "\n")
    return path


FEATS22 = ",".join(f"f{i}" for i in range(22))


def test_load_two_segments(tmp_path):
    path = write_csv(tmp_path / "t.csv", "segment," + FEATS22,
                     ["a," + ",".join(["+"] * 22), "i," + ",".join(["-"] * 22)])
    table = load_feature_table(path)
    assert len(table) == 2
    assert table.n_features == 22
    assert len(table.entries["a"]) == 22


def test_load_bad_cell(tmp_path):
    path = write_csv(tmp_path / "t.csv", "segment,f1,f2", ["a,+,x"])
    with pytest.raises(MalformedFeatureCell):
        load_feature_table(path)


def test_load_duplicate_segment(tmp_path):
    path = write_csv(tmp_path / "t.csv", "segment,f1", ["a,+", "a,-"])
    with pytest.raises(DuplicateSegment):
        load_feature_table(path)


def test_load_ragged_row(tmp_path):
    path = write_csv(tmp_path / "t.csv", "segment,f1,f2", ["a,+"])
    with pytest.raises(MalformedRow):
        load_feature_table(path)


RULES = [("tʃ", "t͡ʃ"), ("ɡ", "g")]


def test_normalize_affricate():
    assert normalize_segment("tʃ", RULES) == "t͡ʃ"


def test_normalize_script_g():
    assert normalize_segment("ɡ", RULES) == "g"


def test_normalize_identity():
    assert normalize_segment("a", RULES) == "a"


def test_normalize_longest_pattern_wins():
    rules = [("t", "d"), ("tʃ", "X")]
    assert normalize_segment("tʃ", rules) == "X"


def test_normalize_cascade_reaches_fixpoint():
    rules = [("a", "b"), ("b", "c")]
    out = normalize_segment("a", rules)
    assert out == "c"
    assert normalize_segment(out, rules) == out


def test_normalize_idempotent():
    for raw in ["tʃatʃa", "ɡɡ", "plain", "t͡ʃ"]:
        once = normalize_segment(raw, RULES)
        assert normalize_segment(once, RULES) == once


def test_normalize_cycle_detected():
    with pytest.raises(CyclicRules):
        normalize_segment("a", [("a", "b"), ("b", "a")])


def make_table(vectors: dict[str, str]) -> FeatureTable:
    entries = {seg: string_to_vector(chars) for seg, chars in vectors.items()}
    width = len(next(iter(entries.values())))
    return FeatureTable([f"f{i}" for i in range(width)], entries)


def test_lookup_roundtrip():
    table = make_table({"a": "+-0", "i": "0-+"})
    assert lookup(table, "a").tolist() == [1, -1, 0]
    with pytest.raises(UnknownSegment) as err:
        lookup(table, "☃")
    assert err.value.segment == "☃"


def test_normalize_then_lookup():
    table = make_table({"g": "+-0"})
    with pytest.raises(UnknownSegment):
        lookup(table, "ɡ")
    fixed = normalize_segment("ɡ", RULES)
    assert lookup(table, fixed).tolist() == lookup(table, "g").tolist()


def test_collapse_counts():
    table = make_table({"a": "+-", "b": "+-", "c": "0+", "d": "-0", "e": "++"})
    collapsed = collapse_table(table)
    assert collapsed.n_classes == 4
    assert collapsed.segment_to_class["a"] == collapsed.segment_to_class["b"]


def test_collapse_representative_is_smallest():
    table = make_table({"zz": "+-", "aa": "+-"})
    collapsed = collapse_table(table)
    assert collapsed.representatives == ["aa"]


def test_collapse_bijection_when_distinct():
    table = make_table({"a": "+-", "b": "-+", "c": "00"})
    collapsed = collapse_table(table)
    assert collapsed.n_classes == 3
    assert sorted(collapsed.segment_to_class.values()) == [0, 1, 2]


def test_collapse_idempotent_and_sound():
    table = make_table({"a": "+-", "b": "+-", "c": "0+", "d": "0+", "e": "--"})
    collapsed = collapse_table(table)
    for seg, vec in table.entries.items():
        cls = collapsed.segment_to_class[seg]
        assert np.array_equal(vec, collapsed.vectors[cls])
    again = collapse_table(
        make_table({rep: "".join("+-0"[[1, -1, 0].index(v)] for v in collapsed.vectors[i])
                    for i, rep in enumerate(collapsed.representatives)})
    )
    assert again.n_classes == collapsed.n_classes


def test_split_uniform():
    assert split_multiphthong(["a", "i"], 0.1) == [("a", 0.05), ("i", 0.05)]
    parts = split_multiphthong(["a", "i", "u"], 0.09)
    assert [p for p, _ in parts] == ["a", "i", "u"]
    assert all(abs(d - 0.03) < 1e-12 for _, d in parts)


def test_split_single_component():
    assert split_multiphthong(["a"], 0.07) == [("a", 0.07)]


def test_split_conserves_duration():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        dur = float(rng.uniform(0.01, 1.0))
        parts = split_multiphthong([f"c{i}" for i in range(n)], dur)
        assert sum(d for _, d in parts) == pytest.approx(dur, abs=0)
        snapped = split_multiphthong([f"c{i}" for i in range(n)], dur, frame_rate=50)
        assert sum(d for _, d in snapped) == pytest.approx(dur, abs=0)


def test_split_empty_components():
    with pytest.raises(EmptyMultiphthong):
        split_multiphthong([], 0.1)


def test_load_rules(tmp_path):
    path = tmp_path / "rules.tsv"
    path.write_text("REWRITE\ttʃ\tt͡ʃ\nSPLIT\taɪ\ta,i\n", encoding="utf-8")
    rules = load_rules(path)
    assert rules.rewrites == [("tʃ", "t͡ʃ")]
    assert rules.splits == {"aɪ": ["a", "i"]}


def test_load_rules_unknown_kind(tmp_path):
    path = tmp_path / "rules.tsv"
    path.write_text("FROB\tx\ty\n", encoding="utf-8")
    with pytest.raises(MalformedRow):
        load_rules(path)
