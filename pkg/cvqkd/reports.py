"""CSV schemas and writers for estimation, rate-sweep and frontier outputs."""
from __future__ import annotations

import csv
import io
import pathlib
from typing import Iterable, Mapping, Optional, Sequence, TextIO, Union

ESTIMATION_FIELDS = ("block_id", "m", "t_hat", "sigma2_hat", "xi_hat", "t_min", "xi_max", "eps_pe")
RATE_SWEEP_FIELDS = (
    "distance_km",
    "loss_db",
    "v_a",
    "snr",
    "i_ab",
    "chi_be",
    "rate_asymptotic",
    "rate_fin_1e9",
    "rate_fin_1e8",
    "xi_assumed",
)
FRONTIER_FIELDS = ("distance_km", "xi_max")
NOISE_SWEEP_FIELDS = ESTIMATION_FIELDS + ("block_size", "repetition", "xi_frontier", "positive_key")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(
    rows: Iterable[Mapping[str, object]],
    fields: Sequence[str],
    target: Optional[Union[str, pathlib.Path, TextIO]] = None,
) -> str:
    """Write rows with a fixed header. Returns the CSV text; also writes to `target` if given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(row.get(f)) for f in fields])
    text = buf.getvalue()
    if isinstance(target, (str, pathlib.Path)):
        pathlib.Path(target).write_text(text, encoding="utf-8")
    elif target is not None:
        target.write(text)
    return text


def read_csv(path: Union[str, pathlib.Path]) -> list[dict]:
    with pathlib.Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
