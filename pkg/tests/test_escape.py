import math

import numpy as np
import pytest

from olb import escape as E
from olb.billiard import step
from olb.errors import LabelMismatch, NoCandidate, Singular, UnknownSymbol

# hand-encoded from the composite-map definitions, written order
HAND = {
    ("A1", 0): "134 313 231",
    ("A1", 1): "134 313 131 313 231",
    ("A2", 2): "241 424 242 424 242 424 342",
    ("A4", 0): "423 131 124",
    ("A4", 1): "423 131 313 131 124",
    ("B1", 0): "312 131 313 231",
    ("B2", 1): "423 242 424 242 424 342",
    ("B3", 0): "134 313 131 413",
}


@pytest.mark.parametrize("key", sorted(HAND))
def test_literal_words(key):
    assert str(E.word_for(*key)) == HAND[key]


def test_single_letters_and_unknown():
    assert str(E.word_for("E1")) == "313"
    assert [str(E.word_for(f"E{k}")) for k in (2, 3, 4)] == ["424", "131", "242"]
    with pytest.raises(UnknownSymbol):
        E.word_for("C7")
    with pytest.raises(ValueError):
        E.PieceLabel(1, 1, 1)


@pytest.mark.parametrize("n", [0, 1, 2, 7])
def test_word_lengths(n):
    assert len(E.word_for("B1", n)) == 2 * (n + 1) + 2
    parts = sum(len(E.word_for(s, n)) for s in ("B1", "B2", "B3", "A2", "A1", "A4"))
    assert len(E.word_for("Tn", n)) == parts


def test_literal_a4_breaks_the_vertex_chain():
    assert E.word_for("A4", 1).chain_breaks() == [0, 3]  # into E_3 and out into T_423
    assert E.word_for("A4", 1, amended=True).chain_breaks() == []
    for s in ("A1", "A2", "B1", "B2", "B3"):
        assert E.word_for(s, 3).chain_breaks() == []
    assert E.word_for("Tn", 5, amended=True).chain_breaks() == []


def test_amendment_touches_only_a4():
    for s in ("A1", "A2", "B1", "B2", "B3", "E1"):
        assert E.word_for(s, 2) == E.word_for(s, 2, amended=True)
    assert str(E.word_for("A4", 1, amended=True)) == "423 242 424 242 124"


def test_census_small():
    cen, singular = E.label_census(20000, seed=3)
    assert set(cen) <= {str(E.PieceLabel(*t)) for t in E.ADMISSIBLE}
    assert len(E.ADMISSIBLE) == 16
    assert singular == 0


def test_classify_on_side_extension():
    with pytest.raises(Singular):
        E.classify((3, 1))


def test_single_letter_word_is_step():
    x = (7.3, -2.2)
    lab = E.classify(x)
    assert E.apply_word(x, E.PieceWord((lab,))) == step(E.SQUARE, x).y


def test_wrong_first_label():
    x = (7.3, -2.2)
    lab = E.classify(x)
    other = next(t for t in sorted(E.ADMISSIBLE) if E.PieceLabel(*t) != lab)
    with pytest.raises(LabelMismatch) as info:
        E.apply_word(x, E.PieceWord((other,)))
    assert info.value.index == 0


def test_compiled_runner_agrees_with_checked_runner():
    C = (3.20913, 4.50786, 0.22210)
    x = E.seed_point(C, 12)
    ok, _, y = E.run_tn(x, 12)
    if ok:
        z = E.apply_word(x, E.word_for("Tn", 12, amended=True))
        assert math.dist(y, z) < 1e-9


def test_empty_window():
    with pytest.raises(NoCandidate):
        E.fit_constants(window=(0, 0, 1, 1))


@pytest.fixture(scope="module")
def fit():
    return E.fit_constants()


def test_fit_constants_track_the_conjecture(fit):
    assert np.all(np.isfinite(fit.residuals))
    assert fit.bounded()
    assert fit.C_m > 0


def test_fitted_seed_follows_word(fit):
    C = (fit.C_m, fit.C_x, fit.C_y)
    ok, _, _ = E.run_tn(E.seed_point(C, 20), 20)
    assert ok
    E.apply_word(E.seed_point(C, 20), E.word_for("Tn", 20, amended=True))


def test_seed_march_direction(fit):
    C = (fit.C_m, fit.C_x, fit.C_y)
    a, b = E.seed_point(C, 10), E.seed_point(C, 11)
    assert b[1] > a[1] and abs(b[0] - a[0]) < 1e-12


def test_literal_word_finds_nothing():
    with pytest.raises(NoCandidate):
        E.fit_constants(amended=False, probes=[10, 20])
