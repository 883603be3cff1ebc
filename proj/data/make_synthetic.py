#!/usr/bin/env python3
"""Regenerates synthetic_commodities.csv: 362 monthly prices built from a
simulated trivariate VMAR(1,1) cycle on top of smooth log trends.

usage: make_synthetic.py path/to/vmar
"""
import csv
import io
import math
import pathlib
import subprocess
import sys

here = pathlib.Path(__file__).resolve().parent
vmar = sys.argv[1] if len(sys.argv) > 1 else "vmar"
sim = subprocess.run(
    [vmar, "simulate", "--model", str(here / "synthetic_model.json"), "--T", "362", "--seed", "2024"],
    check=True, capture_output=True, text=True).stdout
rows = list(csv.reader(io.StringIO(sim)))[1:]

names = ["energy", "metals", "agriculture"]
base = [60.0, 120.0, 90.0]
drift = [0.0030, 0.0020, 0.0015]
with open(here / "synthetic_commodities.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["date"] + names)
    for t, row in enumerate(rows):
        year, month = 1990 + t // 12, t % 12 + 1
        out = [f"{year:04d}-{month:02d}"]
        for i, y in enumerate(row[1:]):
            level = base[i] * math.exp(drift[i] * t + 0.15 * math.sin(2 * math.pi * t / 120 + i) + 0.04 * float(y))
            out.append(f"{level:.6f}")
        w.writerow(out)
