import logging
import os
import typing

import pandas as pd

from .exceptions import CsvFormatError, add_exception_notes

logger = logging.getLogger(__name__)

# the header is row 1, the first data row is row 2
_FIRST_DATA_ROW = 2


def read_numeric_table(
        path: str | os.PathLike,
        columns: typing.Sequence[str],
        optional: typing.Sequence[str] = (),
) -> pd.DataFrame:
    """
    Read a UTF-8 CSV file with a header row and return the requested columns as floats.

    :param path: CSV file
    :param columns: columns that must be present
    :param optional: columns that are kept when present
    :raise CsvFormatError: unreadable file, missing column or a cell that is not a number
    """
    logger.info("Read numeric table %s", path)
    try:
        frame = pd.read_csv(path, dtype=str, encoding="utf-8", skipinitialspace=True)
    except pd.errors.EmptyDataError as exc:
        raise add_exception_notes(CsvFormatError("empty CSV file"), f"file {path}") from exc
    except pd.errors.ParserError as exc:
        raise add_exception_notes(CsvFormatError(f"malformed CSV: {exc}"), f"file {path}") from exc

    missing = [i for i in columns if i not in frame.columns]
    if missing:
        raise add_exception_notes(
            CsvFormatError(f"missing column(s) {', '.join(missing)}"),
            f"file {path}", f"found columns {', '.join(map(str, frame.columns))}",
        )

    keep = list(columns) + [i for i in optional if i in frame.columns]
    result = pd.DataFrame(index=frame.index)
    for name in keep:
        raw = frame[name]
        parsed = pd.to_numeric(raw, errors="coerce")
        bad = parsed.isna()
        if bad.any():
            position = int(bad.to_numpy().argmax())
            raise add_exception_notes(
                CsvFormatError(f"column {name} is not a number: {raw.iloc[position]!r}",
                               row=position + _FIRST_DATA_ROW),
                f"file {path}",
            )
        result[name] = parsed.astype(float)
    logger.debug("Read %s rows with columns %s", len(result), keep)
    return result
