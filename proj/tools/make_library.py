#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes the bundled smooth spectral library used by tests and presets.

Spectra are a sloped continuum with a handful of Gaussian absorption
features, sampled at 224 bands over 0.38-2.5 um. Output is deterministic.
"""
import argparse

import numpy as np

NAMES = [
    "carnallite_like", "jarosite_like", "almandine_like", "brucite_like",
    "axinite_like", "chlorite_like", "kaolinite_like", "alunite_like",
    "calcite_like", "muscovite_like",
]


def make(bands: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    wl = np.linspace(0.38, 2.5, bands)
    out = np.empty((bands, len(NAMES)))
    for k in range(len(NAMES)):
        level = rng.uniform(0.35, 0.75)
        slope = rng.uniform(-0.15, 0.2)
        curve = rng.uniform(-0.1, 0.1)
        x = (wl - 1.44) / 1.06
        s = level + slope * x + curve * x * x
        for _ in range(rng.integers(3, 7)):
            centre = rng.uniform(0.45, 2.45)
            width = rng.uniform(0.02, 0.15)
            depth = rng.uniform(0.05, 0.3)
            s -= depth * np.exp(-0.5 * ((wl - centre) / width) ** 2)
        out[:, k] = np.clip(s, 0.02, 0.98)
    return out


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--bands", type=int, default=224)
    ap.add_argument("--seed", type=int, default=20210)
    ap.add_argument("out")
    args = ap.parse_args()
    lib = make(args.bands, args.seed)
    with open(args.out, "w") as f:
        f.write(",".join(NAMES) + "\n")
        for row in lib:
            f.write(",".join(f"{v:.6f}" for v in row) + "\n")


if __name__ == "__main__":
    main()
