"""
Equilibrium space on three Gaussian blobs
==========================================

A small end-to-end tour: summarize each class as a charge, let the charges
push each other apart, carry the classes along, learn that move with a small
network, and classify fresh samples by the pull of each charge.

Run with ``python demos/blobs_walkthrough.py``.
"""
import numpy as np

from coulomb_equilibrium import (
    SolverConfig, TrainConfig, classify_dataset, init_model, make_blobs,
    partition_by_class, project_classes, solve_equilibrium, summarize_all, train,
)

# three blobs whose centres sit 3 apart, noise sigma 0.5
centers = np.array([[0.0, 0.0], [3.0, 0.0], [1.5, 2.6]])
train_set = make_blobs(centers, 0.5, 100, seed=0)
test_set = make_blobs(centers, 0.5, 50, seed=1)

# one charge per class: position = class mean, charge = mean per-axis variance
classes = partition_by_class(train_set)
summaries = summarize_all(classes)
for s in summaries:
    print(f"class {s.class_id}: mean {np.round(s.position, 3)}  charge {s.charge:.4f}")

# repel until the total force is below the tolerance
model = solve_equilibrium(summaries, k=1.0, config=SolverConfig(tolerance=1e-4))
print(f"\nconverged={model.converged} after {model.iterations_used} iterations, "
      f"total force {model.final_total_force:.2e}")
print("shift vectors:\n", np.round(model.deltas, 3))


def min_gap(points):
    diff = points[:, None] - points[None]
    dist = np.sqrt((diff ** 2).sum(-1))
    return dist[np.triu_indices(len(points), 1)].min()


print(f"closest pair of class means: {min_gap(centers):.2f} before, "
      f"{min_gap(model.equilibrium_positions):.2f} after")

# every class moves rigidly, so its shape is untouched
projected = project_classes(classes, model)
print("spreads kept:", all(np.allclose(a.spread, b.spread)
                           for a, b in zip(summaries, summarize_all(projected))))

# a regressor learns input -> equilibrium position from the training pairs
inputs, targets = np.vstack(classes), np.vstack(projected)
net = train(init_model(2, (32, 32), seed=0), inputs, targets, TrainConfig.constant(1e-2, 300))
print(f"\nregression loss after {net.epochs_completed} epochs: {net.loss_history[-1]:.4f}")

# classify held-out samples, with and without error removal by correlation
for use_erc in (False, True):
    report = classify_dataset(test_set, net, model, use_erc=use_erc)
    print(f"test accuracy ({'ERC' if use_erc else 'no ERC'}): {report.accuracy:.3f}")

# In two dimensions a rank correlation can only be +1 or -1, so ERC has
# almost nothing to go on here; it earns its keep on image-sized vectors
# (see mnist_8x8.py).
