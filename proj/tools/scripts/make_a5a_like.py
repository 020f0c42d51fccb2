#!/usr/bin/env python3
"""Build an a5a-style binarized LibSVM file from the raw UCI Adult table.

Encoding follows the classic 123-feature Adult binarization: continuous
columns are cut into quantile bins (capital gain/loss into zero/nonzero),
categorical columns are one-hot encoded in the order listed in adult.names.
Missing values ('?') produce no active feature. Labels: '>50K' -> +1.

Usage: make_a5a_like.py adult.data out.libsvm [--rows 6414] [--seed 5]
"""

import argparse
import random

CATEGORIES = {
    "workclass": "Private, Self-emp-not-inc, Self-emp-inc, Federal-gov, Local-gov, "
    "State-gov, Without-pay, Never-worked",
    "education": "Bachelors, Some-college, 11th, HS-grad, Prof-school, Assoc-acdm, "
    "Assoc-voc, 9th, 7th-8th, 12th, Masters, 1st-4th, 10th, Doctorate, 5th-6th, Preschool",
    "marital": "Married-civ-spouse, Divorced, Never-married, Separated, Widowed, "
    "Married-spouse-absent, Married-AF-spouse",
    "occupation": "Tech-support, Craft-repair, Other-service, Sales, Exec-managerial, "
    "Prof-specialty, Handlers-cleaners, Machine-op-inspct, Adm-clerical, Farming-fishing, "
    "Transport-moving, Priv-house-serv, Protective-serv, Armed-Forces",
    "relationship": "Wife, Own-child, Husband, Not-in-family, Other-relative, Unmarried",
    "race": "White, Asian-Pac-Islander, Amer-Indian-Eskimo, Other, Black",
    "sex": "Female, Male",
    "country": "United-States, Cambodia, England, Puerto-Rico, Canada, Germany, "
    "Outlying-US(Guam-USVI-etc), India, Japan, Greece, South, China, Cuba, Iran, Honduras, "
    "Philippines, Italy, Poland, Jamaica, Vietnam, Mexico, Portugal, Ireland, France, "
    "Dominican-Republic, Laos, Ecuador, Taiwan, Haiti, Columbia, Hungary, Guatemala, "
    "Nicaragua, Scotland, Thailand, Yugoslavia, El-Salvador, Trinadad&Tobago, Peru, Hong, "
    "Holand-Netherlands",
}
CATEGORIES = {k: [s.strip() for s in v.split(",")] for k, v in CATEGORIES.items()}

# (column index, kind, argument) in output feature order.
LAYOUT = [
    (0, "quantile", 5),
    (1, "onehot", "workclass"),
    (2, "quantile", 5),
    (3, "onehot", "education"),
    (4, "quantile", 5),
    (5, "onehot", "marital"),
    (6, "onehot", "occupation"),
    (7, "onehot", "relationship"),
    (8, "onehot", "race"),
    (9, "onehot", "sex"),
    (10, "nonzero", 2),
    (11, "nonzero", 2),
    (12, "quantile", 5),
    (13, "onehot", "country"),
]


def quantile_cuts(values, bins):
    ordered = sorted(values)
    return [ordered[(len(ordered) * q) // bins] for q in range(1, bins)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("adult")
    ap.add_argument("out")
    ap.add_argument("--rows", type=int, default=6414)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    records = []
    with open(args.adult) as fh:
        for line in fh:
            parts = [p.strip() for p in line.strip().split(",")]
            if len(parts) == 15:
                records.append(parts)

    cuts = {}
    for col, kind, arg in LAYOUT:
        if kind == "quantile":
            cuts[col] = quantile_cuts([float(r[col]) for r in records], arg)

    random.Random(args.seed).shuffle(records)
    records = records[: args.rows]

    with open(args.out, "w") as out:
        for r in records:
            offset = 0
            active = []
            for col, kind, arg in LAYOUT:
                if kind == "quantile":
                    v = float(r[col])
                    active.append(offset + sum(v >= c for c in cuts[col]))
                    offset += arg
                elif kind == "nonzero":
                    active.append(offset + (1 if float(r[col]) > 0 else 0))
                    offset += arg
                else:
                    cats = CATEGORIES[arg]
                    if r[col] in cats:
                        active.append(offset + cats.index(r[col]))
                    offset += len(cats)
            label = "+1" if r[14].startswith(">50K") else "-1"
            out.write(label + " " + " ".join(f"{j + 1}:1" for j in sorted(active)) + "\n")


if __name__ == "__main__":
    main()
