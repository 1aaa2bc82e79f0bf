#!/usr/bin/env python3
"""Generate synthetic hourly market and weather series for the hub optimizer.

The series only mimic the broad statistics of a low-price year (2019) and a
high-price year (2022) in western Denmark. They are not measurements; replace
them with real data for quantitative work (see "Input data" in README.md).

Usage: make_synthetic_data.py [--out data/synthetic] [--years 2019 2022]
"""

import argparse
import math
import pathlib
from datetime import datetime, timedelta, timezone

import numpy as np

HOURS = 8760

# price level, price spread, NG price, NG resolution (hours), seed
YEARS = {
    2019: dict(spot=38.0, spread=0.55, ng=14.0, ng_step=1, emission=0.20, seed=2019),
    2022: dict(spot=210.0, spread=0.75, ng=115.0, ng_step=24, emission=0.17, seed=2022),
}


def ar1(rng, n, phi, sigma):
    out = np.empty(n)
    x = 0.0
    for t in range(n):
        x = phi * x + sigma * rng.standard_normal()
        out[t] = x
    return out


def series(year, p):
    rng = np.random.default_rng(p["seed"])
    hours = np.arange(HOURS)
    day = hours / 24.0
    hour_of_day = hours % 24
    season = np.cos(2 * math.pi * (day - 15) / 365.0)  # +1 mid January

    wind_latent = 0.2 * season + ar1(rng, HOURS, 0.97, 0.25)
    wind = 0.03 + 0.94 / (1.0 + np.exp(-(wind_latent * 1.6 - 1.0)))
    wind = np.clip(wind, 0.0, 1.0)

    elevation = np.sin(math.pi * (hour_of_day - 4) / 16.0)
    daylight = np.where((hour_of_day >= 4) & (hour_of_day <= 20), np.clip(elevation, 0, None), 0.0)
    clouds = np.clip(0.75 + ar1(rng, HOURS, 0.9, 0.12), 0.2, 1.0)
    solar = np.clip(daylight * (0.40 - 0.28 * season) * clouds, 0.0, 1.0)

    daily = 1.0 + 0.12 * np.sin(2 * math.pi * (hour_of_day - 7) / 24.0)
    demand = 2300.0 * (1.0 + 0.12 * season) * daily + 60.0 * rng.standard_normal(HOURS)

    shape = 1.0 + 0.25 * season + 0.15 * (daily - 1.0) / 0.12
    noise = ar1(rng, HOURS, 0.8, 0.12)
    spot = p["spot"] * shape * (1.0 - p["spread"] * (wind - wind.mean()) / wind.std() * 0.45 + noise)
    # Windy nights push prices to the floor.
    spot = np.where(wind > 0.85, np.minimum(spot, rng.uniform(-15.0, 15.0, HOURS)), spot)

    emission = np.clip(p["emission"] * (1.3 - 0.9 * (wind - wind.mean())) + 0.01 * rng.standard_normal(HOURS),
                       0.02, None)

    ng_hourly = p["ng"] * (1.0 + 0.2 * season) * (1.0 + ar1(rng, HOURS, 0.995, 0.01))
    ng_times = hours[:: p["ng_step"]]
    ng = ng_hourly[:: p["ng_step"]]

    dh = np.clip(18.0 + 14.0 * season + 3.0 * (daily - 1.0) / 0.12 + 1.5 * rng.standard_normal(HOURS), 3.0, None)

    return {
        "spot_price.csv": (hours, spot),
        "ng_price.csv": (ng_times, ng),
        "grid_emission.csv": (hours, emission),
        "dk1_demand.csv": (hours, demand),
        "dh_demand.csv": (hours, dh),
        "wind_cf.csv": (hours, wind),
        "solar_cf.csv": (hours, solar),
    }


def write(path, start, hours, values):
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("timestamp,value\n")
        for h, v in zip(hours, values):
            ts = (start + timedelta(hours=int(h))).strftime("%Y-%m-%dT%H:%M:%SZ")
            f.write(f"{ts},{v:.4f}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "synthetic"))
    ap.add_argument("--years", type=int, nargs="+", default=sorted(YEARS))
    args = ap.parse_args()
    for year in args.years:
        target = pathlib.Path(args.out) / str(year)
        target.mkdir(parents=True, exist_ok=True)
        start = datetime(year, 1, 1, tzinfo=timezone.utc)
        for name, (hours, values) in series(year, YEARS[year]).items():
            write(target / name, start, hours, values)
        print(f"wrote {target}")


if __name__ == "__main__":
    main()
