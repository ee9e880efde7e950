"""Seed-derivation tests: children depend only on (master, tag, indices)."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plastevo.seeding import as_seed_sequence, derive, derive_rng


def test_same_arguments_same_child():
    a = derive(1, "net", 3)
    b = derive(1, "net", 3)
    assert a.entropy == b.entropy
    assert a.spawn_key == b.spawn_key
    assert np.random.default_rng(a).random() == np.random.default_rng(b).random()


def test_child_is_independent_of_derivation_order():
    m = 42
    first = derive(m, "world", 7)
    derive(m, "net", 0)
    derive(m, "world", 6)
    again = derive(m, "world", 7)
    assert first.spawn_key == again.spawn_key


def test_distinct_tags_and_indices_give_distinct_streams():
    draws = {
        name: derive_rng(9, tag, *idx).random()
        for name, (tag, idx) in {
            "net0": ("net", (0,)),
            "net1": ("net", (1,)),
            "world0": ("world", (0,)),
            "deep": ("net", (0, 1)),
            "plain": ("net", ()),
        }.items()
    }
    assert len(set(draws.values())) == len(draws)


def test_master_seed_changes_everything():
    assert derive_rng(1, "net", 0).random() != derive_rng(2, "net", 0).random()


def test_accepts_seed_sequences_and_none():
    ss = np.random.SeedSequence(5)
    assert derive(ss, "x").entropy == 5
    assert as_seed_sequence(ss) is ss
    assert as_seed_sequence(7).entropy == 7
    # None draws fresh OS entropy; the call just has to work.
    assert as_seed_sequence(None).entropy is not None


def test_nested_masters_extend_the_spawn_key():
    parent = derive(3, "outer", 2)
    child = derive(parent, "inner", 4)
    assert child.spawn_key[: len(parent.spawn_key)] == parent.spawn_key
    assert child.entropy == parent.entropy


def test_rejects_empty_tags_and_negative_indices():
    with pytest.raises(ValueError):
        derive(1, "")
    with pytest.raises(ValueError):
        derive(1, "net", -1)


def test_derive_rng_matches_manual_seeding():
    ss = derive(11, "trial", 5)
    assert derive_rng(11, "trial", 5).random() == np.random.default_rng(ss).random()


@given(st.integers(0, 2**63 - 1), st.sampled_from(["net", "world", "mutate"]), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_derivation_is_a_pure_function(master, tag, index):
    a = derive(master, tag, index)
    b = derive(master, tag, index)
    assert a.spawn_key == b.spawn_key and a.entropy == b.entropy
