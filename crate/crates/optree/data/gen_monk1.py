"""Regenerates the MONK-1 CSVs from the target concept (a1 == a2) or (a5 == 1).

monk1_test.csv holds all 432 attribute combinations; monk1_train.csv is a
seeded 124-row sample of them.
"""
import csv
import itertools
import random

CARD = [3, 3, 2, 3, 4, 2]
HEADER = ["class"] + [f"a{i + 1}" for i in range(6)]


def label(row):
    return int(row[0] == row[1] or row[4] == 1)


def write(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HEADER)
        for r in rows:
            w.writerow([label(r)] + list(r))


grid = list(itertools.product(*[range(1, c + 1) for c in CARD]))
write("monk1_test.csv", grid)
rng = random.Random(1993)
write("monk1_train.csv", sorted(rng.sample(grid, 124)))
