"""Seeded generator for weather-like CSVs in the 23-column station layout.

Rows carry a planted rain signal: tomorrow's rain depends on afternoon
humidity, pressure, today's rain and the daily temperature range. Cells go
missing at column-specific rates, written as either an empty field or the
literal ``NA``.
"""

import csv
from datetime import date, timedelta

import numpy as np

from .ingest import BOM_SCHEMA

LOCATIONS = ("Albury", "Cairns", "Darwin", "Hobart", "Perth", "Sydney")
COMPASS = ("E", "ENE", "ESE", "N", "NE", "NNE", "NNW", "NW",
           "S", "SE", "SSE", "SSW", "SW", "W", "WNW", "WSW")
SPARSE_COLUMNS = ("Evaporation", "Sunshine", "Cloud9am", "Cloud3pm")


def synthetic_columns(n_rows=2000, seed=0, sparse_missing=0.4, dense_missing=0.02,
                      label_missing=0.01):
    """Column name -> list of string cells (``None`` marks a missing cell)."""
    rng = np.random.default_rng(seed)
    n = int(n_rows)
    loc = rng.integers(0, len(LOCATIONS), n)
    start = date(2010, 1, 1)
    days = np.sort(rng.integers(0, 3000, n))
    season = np.cos(2 * np.pi * (days % 365) / 365.0)

    wet = rng.normal(size=n)  # latent weather state driving most columns
    min_t = 12 + 6 * season + rng.normal(0, 3, n) + 0.5 * loc
    spread = 10 - 2.5 * wet + rng.normal(0, 2, n)
    max_t = min_t + np.clip(spread, 0.5, None)
    rain = np.where(wet + rng.normal(0, 0.7, n) > 0.8, rng.gamma(1.2, 4.0, n), 0.0)
    hum9 = np.clip(70 + 10 * wet + rng.normal(0, 8, n), 5, 100)
    hum3 = np.clip(50 + 14 * wet + rng.normal(0, 9, n), 2, 100)
    p9 = 1017 - 4 * wet + rng.normal(0, 4, n)
    p3 = p9 - 2.5 + rng.normal(0, 1, n)
    gust = np.clip(40 + 6 * wet + rng.normal(0, 12, n), 6, None)
    ws9 = np.clip(14 + rng.normal(0, 8, n), 0, None)
    ws3 = np.clip(18 + 3 * wet + rng.normal(0, 8, n), 0, None)
    t9 = min_t + 0.45 * (max_t - min_t) + rng.normal(0, 1, n)
    t3 = max_t - 0.6 + rng.normal(0, 1, n)
    evap = np.clip(5 - 1.5 * wet + rng.normal(0, 2, n), 0, None)
    sun = np.clip(8 - 2.5 * wet + rng.normal(0, 2, n), 0, 14)
    cloud9 = np.clip(np.round(4 + 2 * wet + rng.normal(0, 2, n)), 0, 8)
    cloud3 = np.clip(np.round(4 + 2 * wet + rng.normal(0, 2, n)), 0, 8)

    logit = (0.06 * (hum3 - 50) - 0.12 * (p3 - 1014) + 0.9 * (rain > 1.0)
             - 0.15 * (max_t - min_t - 10) - 1.9)
    tomorrow = rng.random(n) < 1.0 / (1.0 + np.exp(-logit))

    def fmt(values, digits=1):
        return [f"{v:.{digits}f}" for v in values]

    cols = {
        "Date": [(start + timedelta(days=int(d))).isoformat() for d in days],
        "Location": [LOCATIONS[i] for i in loc],
        "MinTemp": fmt(min_t), "MaxTemp": fmt(max_t), "Rainfall": fmt(rain),
        "Evaporation": fmt(evap), "Sunshine": fmt(sun),
        "WindGustDir": [COMPASS[i] for i in rng.integers(0, 16, n)],
        "WindGustSpeed": fmt(gust, 0),
        "WindDir9am": [COMPASS[i] for i in rng.integers(0, 16, n)],
        "WindDir3pm": [COMPASS[i] for i in rng.integers(0, 16, n)],
        "WindSpeed9am": fmt(ws9, 0), "WindSpeed3pm": fmt(ws3, 0),
        "Humidity9am": fmt(hum9, 0), "Humidity3pm": fmt(hum3, 0),
        "Pressure9am": fmt(p9), "Pressure3pm": fmt(p3),
        "Cloud9am": fmt(cloud9, 0), "Cloud3pm": fmt(cloud3, 0),
        "Temp9am": fmt(t9), "Temp3pm": fmt(t3),
        "RainToday": ["Yes" if r > 1.0 else "No" for r in rain],
        "RainTomorrow": ["Yes" if t else "No" for t in tomorrow],
    }
    for name, cells in cols.items():
        if name in ("Date", "Location"):
            continue
        rate = (sparse_missing if name in SPARSE_COLUMNS
                else label_missing if name == "RainTomorrow" else dense_missing)
        for i in np.flatnonzero(rng.random(n) < rate):
            cells[i] = None
    return cols


def write_synthetic_csv(path, n_rows=2000, seed=0, **rates):
    """Write a synthetic station CSV; missing cells alternate between an
    empty field and ``NA``."""
    cols = synthetic_columns(n_rows, seed, **rates)
    names = list(BOM_SCHEMA)
    blank = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(int(n_rows)):
            row = []
            for name in names:
                cell = cols[name][i]
                if cell is None:
                    cell = "" if blank % 2 == 0 else "NA"
                    blank += 1
                row.append(cell)
            writer.writerow(row)
    return path
