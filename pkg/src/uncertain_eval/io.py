"""CSV formats for observations, feedback parameters and predictions.

All files are UTF-8 with LF line endings and a ``.`` decimal separator.
Headers are fixed:

    observations: user_id,item_id,trial,rating
    feedback:     user_id,item_id,mu,sigma
    predictions:  user_id,item_id,prediction
    histogram:    bin_lo,bin_hi,count
    sample dump:  sample_index,score

Neither the observation nor the feedback format persists a rating scale;
on ingestion a continuous scale is inferred from the observed value range
(padded by one unit when all values coincide).
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InputError
from .feedback import (
    FeedbackDataset,
    FeedbackKey,
    ObservationSet,
    PredictionSet,
    RatingObservation,
    RatingScale,
    UncertainFeedback,
)
from .simulate import HistogramBin

OBSERVATION_HEADER = ["user_id", "item_id", "trial", "rating"]
FEEDBACK_HEADER = ["user_id", "item_id", "mu", "sigma"]
PREDICTION_HEADER = ["user_id", "item_id", "prediction"]
HISTOGRAM_HEADER = ["bin_lo", "bin_hi", "count"]
SAMPLE_DUMP_HEADER = ["sample_index", "score"]


def _read_rows(path: str | Path, header: Sequence[str]) -> list[list[str]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise InputError(f"{path}: empty file, expected header {','.join(header)}")
    got = rows[0]
    for column in header:
        if column not in got:
            raise InputError(f"{path}: missing column {column!r} in header")
    for column in got:
        if column not in header:
            raise InputError(f"{path}: unexpected column {column!r} in header")
    if len(rows) == 1:
        raise InputError(f"{path}: no data rows")
    return rows


def _cell(row: list[str], columns: list[str], name: str, path: Path, line: int) -> str:
    try:
        return row[columns.index(name)]
    except IndexError:
        raise InputError(f"{path}:{line}: row has too few fields") from None


def _parse_float(text: str, name: str, path: Path, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"{path}:{line}: bad {name} value {text!r}") from None
    return value


def _infer_scale(values: Iterable[float]) -> RatingScale:
    values = list(values)
    lo, hi = min(values), max(values)
    if lo == hi:
        hi = lo + 1.0
    return RatingScale(min_value=lo, max_value=hi)


def read_observations(
    path: str | Path, scale: RatingScale | None = None
) -> ObservationSet:
    path = Path(path)
    rows = _read_rows(path, OBSERVATION_HEADER)
    columns = rows[0]
    observations = []
    for line, row in enumerate(rows[1:], start=2):
        user = _cell(row, columns, "user_id", path, line)
        item = _cell(row, columns, "item_id", path, line)
        trial_text = _cell(row, columns, "trial", path, line)
        try:
            trial = int(trial_text)
        except ValueError:
            raise InputError(f"{path}:{line}: bad trial value {trial_text!r}") from None
        if trial < 0:
            raise InputError(f"{path}:{line}: trial must be non-negative, got {trial}")
        value = _parse_float(
            _cell(row, columns, "rating", path, line), "rating", path, line
        )
        try:
            observations.append(
                RatingObservation(
                    key=FeedbackKey(user_id=user, item_id=item),
                    trial=trial,
                    value=value,
                )
            )
        except InputError as exc:
            raise InputError(f"{path}:{line}: {exc}") from None
    if scale is None:
        scale = _infer_scale(o.value for o in observations)
    return ObservationSet(scale=scale, observations=tuple(observations))


def write_observations(path: str | Path, obs: ObservationSet) -> None:
    rows = sorted(obs.observations, key=lambda o: (o.key, o.trial))
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(OBSERVATION_HEADER)
        for o in rows:
            writer.writerow([o.key.user_id, o.key.item_id, o.trial, repr(o.value)])


def read_feedback(
    path: str | Path, scale: RatingScale | None = None
) -> FeedbackDataset:
    path = Path(path)
    rows = _read_rows(path, FEEDBACK_HEADER)
    columns = rows[0]
    entries = []
    for line, row in enumerate(rows[1:], start=2):
        user = _cell(row, columns, "user_id", path, line)
        item = _cell(row, columns, "item_id", path, line)
        mu = _parse_float(_cell(row, columns, "mu", path, line), "mu", path, line)
        sigma = _parse_float(
            _cell(row, columns, "sigma", path, line), "sigma", path, line
        )
        try:
            entries.append(
                UncertainFeedback(
                    key=FeedbackKey(user_id=user, item_id=item), mu=mu, sigma=sigma
                )
            )
        except InputError as exc:
            raise InputError(f"{path}:{line}: {exc}") from None
    if scale is None:
        scale = _infer_scale(e.mu for e in entries)
    entries.sort(key=lambda e: e.key)
    return FeedbackDataset(scale=scale, entries=tuple(entries))


def write_feedback(path: str | Path, data: FeedbackDataset) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(FEEDBACK_HEADER)
        for e in data.sorted_entries():
            writer.writerow([e.key.user_id, e.key.item_id, repr(e.mu), repr(e.sigma)])


def read_predictions(path: str | Path) -> PredictionSet:
    path = Path(path)
    rows = _read_rows(path, PREDICTION_HEADER)
    columns = rows[0]
    entries: dict[FeedbackKey, float] = {}
    for line, row in enumerate(rows[1:], start=2):
        key = FeedbackKey(
            user_id=_cell(row, columns, "user_id", path, line),
            item_id=_cell(row, columns, "item_id", path, line),
        )
        if key in entries:
            raise InputError(
                f"{path}:{line}: duplicate prediction for {key.user_id}/{key.item_id}"
            )
        entries[key] = _parse_float(
            _cell(row, columns, "prediction", path, line), "prediction", path, line
        )
    return PredictionSet(entries)


def write_predictions(path: str | Path, predictions: PredictionSet) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(PREDICTION_HEADER)
        for key in sorted(predictions.entries):
            writer.writerow([key.user_id, key.item_id, repr(predictions.entries[key])])


def write_histogram(path: str | Path, bins: Sequence[HistogramBin]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HISTOGRAM_HEADER)
        for b in bins:
            writer.writerow([repr(b.bin_lo), repr(b.bin_hi), b.count])


def write_sample_dump(path: str | Path, samples: Iterable[float]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SAMPLE_DUMP_HEADER)
        for i, score in enumerate(samples):
            writer.writerow([i, repr(float(score))])
