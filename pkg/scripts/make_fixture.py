"""Regenerate the bundled synthetic colleges fixture CSV.

Deterministic under the fixed seed; rerun after changing the recipe:

    python scripts/make_fixture.py
"""
from __future__ import annotations

import csv
import random
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "unitcanvas" / "resources" / "colleges.csv"

REGIONS = [
    ("New England", 15),
    ("Mid-Atlantic", 16),
    ("Great Lakes", 15),
    ("Plains", 13),
    ("Southeast", 17),
    ("Southwest", 13),
    ("Rocky Mountains", 11),
    ("Far West", 16),
    ("Outlying Areas", 4),
]

LOCALES = [
    ("Large City", 26),
    ("Midsize City", 18),
    ("Small City", 14),
    ("Large Suburb", 22),
    ("Small Suburb", 9),
    ("Small Town", 14),
    ("Remote Town", 10),
    ("Rural", 7),
]

# Name fragments chosen to avoid every lexicon phrase (regions, locales,
# colors, operation keywords, canvas regions, attribute words).
ONSETS = [
    "Alder", "Bren", "Cald", "Dray", "Elm", "Fenn", "Gil", "Hart",
    "Ivers", "Jessel", "Kirk", "Lind", "Mori", "Nor", "Oak", "Pember",
]
CODAS = ["bury", "dale", "ford", "gate", "holm", "mere", "stead", "wick", "worth"]
SUFFIXES = ["University", "College", "Institute"]


def clip(v: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, v))


def weighted(rng: random.Random, pairs: list[tuple[str, int]]) -> str:
    values = [v for v, _ in pairs]
    weights = [w for _, w in pairs]
    return rng.choices(values, weights=weights, k=1)[0]


def make_rows(seed: int = 20260810) -> list[dict]:
    rng = random.Random(seed)
    names = ["Stanford University"]
    pool = [f"{a}{b}" for a in ONSETS for b in CODAS]
    rng.shuffle(pool)
    for i, base in enumerate(pool):
        names.append(f"{base} {SUFFIXES[i % len(SUFFIXES)]}")
        if len(names) == 120:
            break

    region_bag = [r for r, w in REGIONS for _ in range(w)]
    assert len(region_bag) == 120
    rng.shuffle(region_bag)

    rows = []
    for i, name in enumerate(names):
        region = region_bag[i]
        locale = weighted(rng, LOCALES)
        control = "Private" if rng.random() < 0.55 else "Public"
        sat = round(clip(rng.gauss(1230 if control == "Private" else 1150, 140), 900, 1560))
        if control == "Private":
            cost = int(round(clip(rng.gauss(43000, 11000), 16000, 68000), -2))
        else:
            cost = int(round(clip(rng.gauss(22000, 7000), 9000, 40000), -2))
        adm = round(clip(1.08 - sat / 1650 + rng.gauss(0, 0.09), 0.04, 0.95), 2)
        debt = int(round(clip(rng.gauss(17000, 5000), 5500, 32000), -2))
        population = round(clip(rng.lognormvariate(8.6, 0.85), 600, 52000))
        earnings = int(round(clip(24000 + (sat - 900) * 62 + rng.gauss(0, 6000), 24000, 98000), -2))
        expenditure = int(round(clip(cost * 1.08 + rng.gauss(0, 9000), 6000, 115000), -2))
        row = {
            "Name": name,
            "Region": region,
            "Locale": locale,
            "Control": control,
            "SAT Average": sat,
            "Average Cost": cost,
            "Median Debt": debt,
            "Admission Rate": adm,
            "Population": population,
            "Median Earnings": earnings,
            "Expenditure": expenditure,
        }
        rows.append(row)

    # ~2% missing cells in two quantitative columns, never in row 0
    for col in ("SAT Average", "Median Debt"):
        for idx in rng.sample(range(1, 120), 3):
            rows[idx][col] = "NA"
    return rows


def main() -> None:
    rows = make_rows()
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows -> {OUT}")


if __name__ == "__main__":
    main()
