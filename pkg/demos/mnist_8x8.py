"""
Digits at 8x8: the full pipeline on a desk-sized subset
=======================================================

Uses the gzip IDX files in ``data/mnist`` (4,000 training and 1,000 test
digits), downsamples them to 8x8, and runs fit, train and evaluate exactly
as the command line does. Takes about a minute on one core.

Run with ``python demos/mnist_8x8.py [model_dir]``.
"""
import sys
import tempfile
from pathlib import Path

import numpy as np

from coulomb_equilibrium import pipeline

root = Path(__file__).resolve().parents[1] / "data" / "mnist"
model_dir = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="ce-mnist-")

config = pipeline.PipelineConfig(
    model_dir=model_dir,
    train_images=str(root / "train-images-idx3-ubyte.gz"),
    train_labels=str(root / "train-labels-idx1-ubyte.gz"),
    test_images=str(root / "t10k-images-idx3-ubyte.gz"),
    test_labels=str(root / "t10k-labels-idx1-ubyte.gz"),
    dataset_name="mnist",
    resolution="8",
    max_train=2000,
)

# stage 1a: class charges and their equilibrium
model = pipeline.fit(config)
print(f"equilibrium: n={model.n_classes} d={model.dim} converged={model.converged} "
      f"iterations={model.iterations_used}")
print("charges:", np.round(model.charges, 4))
print("shift lengths:", np.round(np.linalg.norm(model.deltas, axis=1), 3))

# stage 1b: 30 epochs of RMSprop, 1e-4 then 1e-5
transform = pipeline.train_transform(config)
print("loss per epoch:", " ".join(f"{v:.4f}" for v in transform.loss_history[::5]), "...")

# stage 2: classify, before and after ERC
reports = pipeline.evaluate(config)
print(f"\n{'':10s}{'Before ERC':>12s}{'After ERC':>12s}")
print(f"{'accuracy':10s}{reports[False].accuracy:12.4f}{reports[True].accuracy:12.4f}")
erc = reports[True]
print(f"per-sample time: transform {erc.timing['transform'] / erc.n_samples * 1e3:.3f} ms, "
      f"ERC {erc.timing['erc'] / erc.n_samples * 1e3:.3f} ms, "
      f"force {erc.timing['force'] / erc.n_samples * 1e3:.4f} ms")

# confusion matrix after ERC: rows are true digits
print("\nconfusion (after ERC):")
print(erc.confusion)
print(f"\nartifacts in {model_dir}")
