"""Materialize the benchmark datasets as CSV files for tests and the CLI.

Iris and wine ship with scikit-learn. The glass data comes from the
``fgl`` forensic-glass table bundled with pydataset (the classic 214-row,
9-feature, 6-class set; its refractive-index column is an affine rescale
of the original, which z-score normalization makes immaterial). The wave
data is sampled from the standard three-triangle waveform generator: 21
informative attributes built from two of three triangular bases mixed by
a uniform weight plus unit Gaussian noise, and 19 pure-noise attributes.
"""

import csv
from pathlib import Path

import numpy as np

WAVE_SEED = 20230417
WAVE_SAMPLES = 5000


def write_csv(path, features, label_strings, feature_names, label_name="class"):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(feature_names) + [label_name])
        for row, label in zip(features, label_strings):
            writer.writerow([repr(float(v)) for v in row] + [label])
    return path


def iris_arrays():
    from sklearn.datasets import load_iris
    bunch = load_iris()
    labels = [bunch.target_names[t] for t in bunch.target]
    names = [n.replace(" (cm)", "").replace(" ", "_") for n in bunch.feature_names]
    return bunch.data, labels, names


def wine_arrays():
    from sklearn.datasets import load_wine
    bunch = load_wine()
    labels = [bunch.target_names[t] for t in bunch.target]
    names = [n.replace("/", "_") for n in bunch.feature_names]
    return bunch.data, labels, names


def glass_arrays():
    from pydataset import data as rdataset
    frame = rdataset("fgl")
    feature_names = [c for c in frame.columns if c != "type"]
    features = frame[feature_names].to_numpy(dtype=float)
    labels = [str(v) for v in frame["type"]]
    return features, labels, feature_names


def wave_arrays(seed=WAVE_SEED, n_samples=WAVE_SAMPLES):
    rng = np.random.default_rng(seed)
    positions = np.arange(1, 22)
    bases = np.stack([
        np.maximum(6.0 - np.abs(positions - 7), 0.0),
        np.maximum(6.0 - np.abs(positions - 15), 0.0),
        np.maximum(6.0 - np.abs(positions - 11), 0.0),
    ])
    base_pairs = [(0, 1), (0, 2), (1, 2)]
    classes = rng.integers(0, 3, size=n_samples)
    mix = rng.uniform(0.0, 1.0, size=n_samples)
    features = rng.standard_normal((n_samples, 40))
    for c, (a, b) in enumerate(base_pairs):
        rows = classes == c
        features[rows, :21] += (mix[rows, None] * bases[a]
                                + (1.0 - mix[rows, None]) * bases[b])
    labels = [str(c) for c in classes]
    names = [f"x{i}" for i in range(1, 41)]
    return features, labels, names


_BUILDERS = {
    "iris": iris_arrays,
    "wine": wine_arrays,
    "glass": glass_arrays,
    "wave": wave_arrays,
}


def materialize(name, directory):
    """Write ``<name>.csv`` under ``directory`` and return its path."""
    features, labels, names = _BUILDERS[name]()
    return write_csv(Path(directory) / f"{name}.csv", features, labels, names)


if __name__ == "__main__":
    import sys
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data"
    for dataset in _BUILDERS:
        try:
            print(materialize(dataset, out_dir))
        except ImportError as exc:
            print(f"skipping {dataset}: {exc}", file=sys.stderr)
