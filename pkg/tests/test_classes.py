import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import landrisk as lr
from landrisk.classes import ClassTableError, LabelError

# class id -> risk level, straight from the taxonomy table
PAPER_GROUPING = {
    **dict.fromkeys([0, 1, 2, 3, 4], 0),
    **dict.fromkeys([5, 6], 1),
    **dict.fromkeys([7, 8, 9, 10, 11], 2),
    **dict.fromkeys(range(12, 20), 3),
    **dict.fromkeys([20, 21, 22], 4),
    23: 5,
}


def _doc(**override):
    doc = [
        {"id": 0, "label": "a", "color": [0, 0, 0], "risk": 0},
        {"id": 1, "label": "b", "color": [1, 2, 3], "risk": 5},
    ]
    doc[1].update(override)
    return doc


def test_default_table_grouping(table):
    assert len(table) == 24
    assert table.grouping() == PAPER_GROUPING


def test_default_table_rows(table):
    assert table[23].label == "person" and table[23].risk == 5
    assert table[5].label == "paved-area" and table[5].risk == 1
    assert table.by_label("grass").id == 2


def test_default_palette_distinct(table):
    assert len({e.color for e in table.entries}) == 24


def test_entries_sorted_by_id():
    doc = list(reversed(_doc()))
    t = lr.build_class_table(doc)
    assert [e.id for e in t.entries] == [0, 1]


@pytest.mark.parametrize(
    "override, message",
    [
        ({"color": [0, 0, 0]}, "duplicate color"),
        ({"id": 0}, "duplicate id"),
        ({"risk": 6}, "outside [0, 5]"),
        ({"risk": -1}, "outside [0, 5]"),
        ({"id": 2}, "non-contiguous"),
        ({"color": [0, 0, 256]}, "0-255"),
        ({"color": [0, 0]}, "triple"),
        ({"risk": 1.5}, "integer"),
    ],
)
def test_invalid_documents(override, message):
    with pytest.raises(ClassTableError, match=message.replace("[", r"\[").replace("]", r"\]")):
        lr.build_class_table(_doc(**override))


def test_duplicate_color_names_entry():
    with pytest.raises(ClassTableError, match="label='b'"):
        lr.build_class_table(_doc(color=[0, 0, 0]))


def test_load_from_file(tmp_path):
    p = tmp_path / "t.json"
    p.write_text(json.dumps(_doc()))
    assert len(lr.load_class_table(p)) == 2


def test_map_examples(table):
    assert lr.map_class_to_risk(np.array([[23]]), table).tolist() == [[5]]
    labels = np.array([[2, 5], [21, 12]], dtype=np.uint8)
    assert lr.map_class_to_risk(labels, table).tolist() == [[0, 1], [4, 3]]
    assert not lr.map_class_to_risk(np.zeros((4, 7), np.uint8), table).any()


def test_map_all_classes(table):
    labels = np.arange(24, dtype=np.uint8).reshape(4, 6)
    risk = lr.map_class_to_risk(labels, table)
    assert risk.shape == labels.shape
    assert [int(risk.flat[i]) for i in range(24)] == [PAPER_GROUPING[i] for i in range(24)]


def test_map_invalid_id_reports_pixel(table):
    labels = np.zeros((3, 4), np.uint8)
    labels[2, 1] = 24
    with pytest.raises(LabelError, match=r"x=1, y=2"):
        lr.map_class_to_risk(labels, table)


@settings(max_examples=50, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 8), st.integers(1, 8)), elements=st.integers(0, 23)), st.randoms())
def test_map_is_pointwise(labels, random):
    table = lr.default_class_table()
    flat = labels.ravel()
    perm = list(range(flat.size))
    random.shuffle(perm)
    permuted = flat[perm].reshape(labels.shape)
    assert np.array_equal(
        lr.map_class_to_risk(permuted, table).ravel(),
        lr.map_class_to_risk(labels, table).ravel()[perm],
    )


def test_risk_levels_fixed_under_regrouping(table):
    # regrouping the levels themselves is the identity
    levels = np.arange(6, dtype=np.uint8)[None, :]
    risk = lr.map_class_to_risk(np.arange(24, dtype=np.uint8)[None, :], table)
    assert np.array_equal(np.take(np.arange(6), risk), risk)
    assert set(np.unique(risk)) == set(levels.ravel())


def test_argmax_examples():
    assert lr.argmax_labels(np.array([[[0.1, 0.9]]])).tolist() == [[1]]
    assert lr.argmax_labels(np.array([[[0.5, 0.5]]])).tolist() == [[0]]
    assert lr.argmax_labels(np.array([[[1, 0], [0, 1]]])).tolist() == [[0, 1]]


def test_argmax_channel_mismatch(table):
    with pytest.raises(LabelError, match="channels"):
        lr.argmax_labels(np.zeros((2, 2, 3)), table)


def test_argmax_rejects_nonfinite():
    with pytest.raises(LabelError, match="non-finite"):
        lr.argmax_labels(np.array([[[np.nan, 1.0]]]))


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.int64, st.tuples(st.integers(1, 5), st.integers(1, 5), st.integers(1, 6)), elements=st.integers(-50, 50)),
    st.integers(-1000, 1000),
)
def test_argmax_shift_invariant(scores, shift):
    # integer-valued scores keep the shift exact
    assert np.array_equal(lr.argmax_labels(scores), lr.argmax_labels(scores + shift))
