"""Shared setup: a generated station file and a small config around it."""

import tempfile
from pathlib import Path

from rainer.config import parse_config
from rainer.synthetic import write_synthetic_csv

WORKDIR = Path(tempfile.gettempdir()) / "rainer-demos"


def demo_config(n_rows=3000, seed=11, **yaml_extra):
    WORKDIR.mkdir(exist_ok=True)
    path = WORKDIR / f"stations-{n_rows}-{seed}.csv"
    if not path.exists():
        write_synthetic_csv(path, n_rows=n_rows, seed=seed)
    extra = "".join(f"{k}: {v}\n" for k, v in yaml_extra.items())
    return parse_config(f"data: {{input: {path}}}\noutput: {WORKDIR / 'out'}\n{extra}")
