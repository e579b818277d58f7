"""Build the small MNIST fixture under ``data/mnist/``.

The source is the 5,000-image MNIST training subset (500 per digit) shipped
inside the ``mlxtend`` wheel as ``mnist_5k.csv.gz``. It is split per class,
with a fixed seed, into 4,000 training and 1,000 test images and written as
gzip-compressed IDX files.

Usage::

    pip download --no-deps mlxtend -d /tmp/wheels
    python scripts/build_mnist_fixture.py /tmp/wheels/mlxtend-*.whl
"""
import gzip
import sys
import zipfile
from pathlib import Path

import numpy as np

from coulomb_equilibrium.dataset import LabeledDataset, save_idx, stratified_split

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"
OUT = Path(__file__).resolve().parents[1] / "data" / "mnist"


def main(wheel):
    raw = gzip.decompress(zipfile.ZipFile(wheel).read(MEMBER)).decode()
    table = np.loadtxt(raw.splitlines(), delimiter=",", dtype=np.int64)
    pixels, labels = table[:, :-1], table[:, -1]
    assert pixels.shape[1] == 784 and pixels.min() >= 0 and pixels.max() <= 255
    full = LabeledDataset(pixels / 255.0, labels, 10)
    train, test = stratified_split(full, test_fraction=0.2, seed=20210101)
    OUT.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", train), ("t10k", test)):
        save_idx(part, OUT / f"{name}-images-idx3-ubyte.gz", OUT / f"{name}-labels-idx1-ubyte.gz")
        print(name, part.n_samples, np.bincount(part.labels).tolist())


if __name__ == "__main__":
    main(sys.argv[1])
