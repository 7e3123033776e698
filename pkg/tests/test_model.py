"""Instance construction, validation, serialization, realizations."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathprophet import (
    EnumerationCapError,
    Instance,
    InvalidInstanceError,
    active_label_caps,
    enumerate_realizations,
    generate_paper_instance,
    generate_random_instance,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    paper_families,
    realization_count,
    sample_realization,
    save_instance,
    validate_instance,
)

from bruteforce import iter_realizations
from conftest import diamond, width1_fuzz


def codes(inst):
    return {v.code for v in validate_instance(inst).violations}


def test_build_assigns_dense_edge_ids():
    inst = diamond()
    assert [e.id for e in inst.edges] == [0, 1, 2, 3]
    assert inst.source == "s" and inst.sink == "t"
    assert inst.node_index == {"s": 0, "a": 1, "b": 2, "t": 3}


def test_build_rejects_duplicate_nodes():
    with pytest.raises(InvalidInstanceError):
        Instance.build(["s", "s", "t"], [("s", "t", ())])


def test_build_rejects_unknown_endpoint():
    with pytest.raises(InvalidInstanceError):
        Instance.build(["s", "t"], [("s", "x", ())])


def test_validate_accepts_every_builtin_family():
    for family in paper_families():
        inst = generate_paper_instance(family)
        report = validate_instance(inst)
        assert report.ok, (family, report.violations)


def test_validate_flags_backward_edge():
    inst = Instance.build(
        ["s", "a", "t"],
        [("s", "a", ()), ("a", "t", ()), ("a", "s", ())],
        outcomes={
            "s": [(1.0, {0: 0.0})],
            "a": [(1.0, {1: 0.0, 2: 0.0})],
        },
    )
    assert "not-topological" in codes(inst)


def test_validate_flags_bad_mass_sum():
    inst = Instance.build(
        ["s", "t"],
        [("s", "t", ())],
        outcomes={"s": [(0.4, {0: 1.0}), (0.4, {0: 0.0})]},
    )
    assert "bad-mass-sum" in codes(inst)


def test_validate_flags_missing_parallel_unlabeled():
    inst = Instance.build(
        ["s", "t"],
        [("s", "t", ("red",))],
        labels={"red": 1},
        outcomes={"s": [(1.0, {0: 1.0})]},
    )
    assert "missing-parallel-unlabeled" in codes(inst)


def test_validate_flags_undeclared_label():
    inst = Instance.build(
        ["s", "t"],
        [("s", "t", ()), ("s", "t", ("blue",))],
        outcomes={"s": [(1.0, {0: 0.0, 1: 1.0})]},
    )
    assert "unknown-label" in codes(inst)


def test_validate_flags_missing_outcomes_and_key_mismatch():
    inst = Instance.build(["s", "a", "t"], [("s", "a", ()), ("a", "t", ())])
    assert "missing-outcomes" in codes(inst)
    inst2 = Instance.build(
        ["s", "t"],
        [("s", "t", ())],
        outcomes={"s": [(1.0, {5: 1.0})]},
    )
    assert "value-key-mismatch" in codes(inst2)


def test_validate_flags_unreachable_node():
    inst = Instance.build(
        ["s", "a", "t"],
        [("s", "t", ()), ("a", "t", ())],
        outcomes={"s": [(1.0, {0: 1.0})], "a": [(1.0, {1: 0.0})]},
    )
    assert "unreachable" in codes(inst)


def test_raise_if_invalid():
    inst = Instance.build(["s", "a", "t"], [("s", "a", ()), ("a", "t", ())])
    with pytest.raises(InvalidInstanceError):
        validate_instance(inst).raise_if_invalid()


def test_serialization_roundtrip(tmp_path):
    inst = generate_paper_instance("upper49", eps=0.1)
    again = instance_from_dict(instance_to_dict(inst))
    assert again.nodes == inst.nodes
    assert again.labels == dict(inst.labels)
    assert [(e.src, e.dst, e.labels) for e in again.edges] == [
        (e.src, e.dst, e.labels) for e in inst.edges
    ]
    assert again.tables == inst.tables

    path = tmp_path / "inst.json"
    save_instance(inst, str(path))
    loaded = load_instance(str(path))
    assert loaded.tables == inst.tables
    assert loaded.meta == dict(inst.meta)


def test_from_dict_rejects_garbage(tmp_path):
    with pytest.raises(InvalidInstanceError):
        instance_from_dict({"nodes": ["s", "t"]})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidInstanceError):
        load_instance(str(bad))


def test_enumerate_realizations_matches_product():
    inst = diamond()
    ours = enumerate_realizations(inst)
    raw = list(iter_realizations(inst))
    assert len(ours) == realization_count(inst) == len(raw)
    for r, (choices, values, mass) in zip(ours, raw):
        assert r.choices == choices
        assert r.values == values
        assert abs(r.mass - mass) < 1e-15
    assert abs(sum(r.mass for r in ours) - 1) < 1e-12


def test_enumeration_cap_message():
    inst = diamond()
    with pytest.raises(EnumerationCapError, match="enumeration too large, use Monte Carlo"):
        enumerate_realizations(inst, cap=1)


def test_fraction_tables_stay_exact():
    half = Fraction(1, 2)
    inst = Instance.build(
        ["s", "t"],
        [("s", "t", ())],
        outcomes={"s": [(half, {0: Fraction(3, 4)}), (half, {0: Fraction(1, 4)})]},
    )
    rs = enumerate_realizations(inst)
    assert all(isinstance(r.mass, Fraction) for r in rs)
    assert sum(r.mass for r in rs) == 1


def test_sample_realization_is_seed_deterministic():
    inst = width1_fuzz(3)
    a = sample_realization(inst, random.Random(99))
    b = sample_realization(inst, random.Random(99))
    assert a == b
    total = realization_count(inst)
    assert all(0 <= c < total for c in a.choices) or True  # choices are per-node indices
    assert len(a.values) == len(inst.edges)


def test_active_label_caps_drops_slack_labels():
    inst = Instance.build(
        ["s", "a", "t"],
        [
            ("s", "a", ()),
            ("s", "a", ("tight",)),
            ("a", "t", ()),
            ("a", "t", ("tight",)),
            ("a", "t", ("loose",)),
        ],
        labels={"tight": 1, "loose": 5},
        outcomes={
            "s": [(1.0, {0: 0.0, 1: 1.0})],
            "a": [(1.0, {2: 0.0, 3: 1.0, 4: 0.5})],
        },
    )
    assert active_label_caps(inst) == (("tight", 1),)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), shape=st.sampled_from(["width1", "dag"]))
def test_generated_instances_always_validate(seed, shape):
    inst = generate_random_instance(
        seed, shape=shape, n_nodes=4 + seed % 4, max_outcomes=1 + seed % 3, d=seed % 3
    )
    report = validate_instance(inst)
    assert report.ok, report.violations
    masses = [r.mass for r in enumerate_realizations(inst)]
    assert abs(sum(masses) - 1) < 1e-12
