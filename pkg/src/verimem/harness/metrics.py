"""Class-wise F1 and its unweighted macro average."""

from __future__ import annotations

from typing import NamedTuple, Sequence

from ..models import VeracityLabel


class EmptyInputError(ValueError):
    """No (gold, predicted) pairs to score."""


class F1Scores(NamedTuple):
    f1_true: float
    f1_false: float
    macro: float


def _class_f1(
    pairs: Sequence[tuple[VeracityLabel, VeracityLabel]], positive: VeracityLabel
) -> float:
    true_pos = sum(1 for gold, pred in pairs if gold is positive and pred is positive)
    false_pos = sum(1 for gold, pred in pairs if gold is not positive and pred is positive)
    false_neg = sum(1 for gold, pred in pairs if gold is positive and pred is not positive)
    denominator = 2 * true_pos + false_pos + false_neg
    if denominator == 0:
        # Class absent from both gold and predictions.
        return 0.0
    return 2 * true_pos / denominator


def macro_f1(
    pairs: Sequence[tuple[VeracityLabel, VeracityLabel]],
) -> F1Scores:
    """Per-class F1 treating each label in turn as positive, plus their mean."""
    if not pairs:
        raise EmptyInputError("no prediction pairs to score")
    f1_true = _class_f1(pairs, VeracityLabel.TRUE)
    f1_false = _class_f1(pairs, VeracityLabel.FALSE)
    return F1Scores(f1_true, f1_false, (f1_true + f1_false) / 2.0)
