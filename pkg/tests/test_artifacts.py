import numpy as np
import pytest

from coulomb_equilibrium import artifacts
from coulomb_equilibrium.dataset import make_blobs, partition_by_class
from coulomb_equilibrium.equilibrium import solve_equilibrium
from coulomb_equilibrium.errors import FormatError
from coulomb_equilibrium.summaries import summarize_all
from coulomb_equilibrium.transform import TrainConfig, init_model, train


@pytest.fixture
def fitted():
    ds = make_blobs([[0.0, 0.0, 0.0], [1.0, 2.0, 0.5], [3.0, -1.0, 1.0]], 0.4, 20, seed=0)
    summaries = summarize_all(partition_by_class(ds))
    return summaries, solve_equilibrium(summaries, k=3.5)


def write(tmp_path, name, text):
    path = tmp_path / name
    artifacts.atomic_write(path, text)
    return path


def test_fmt_round_trips_doubles():
    values = np.random.default_rng(0).normal(size=1000) * 10.0 ** np.linspace(-300, 300, 1000)
    assert all(float(artifacts.fmt(v)) == v for v in values)


def test_summaries_round_trip(tmp_path, fitted):
    summaries, _ = fitted
    back = artifacts.load_summaries(write(tmp_path, "s.txt", artifacts.dump_summaries(summaries)))
    for a, b in zip(summaries, back):
        assert (a.class_id, a.charge, a.count) == (b.class_id, b.charge, b.count)
        assert a.position.tobytes() == b.position.tobytes()
        assert a.spread.tobytes() == b.spread.tobytes()


def test_equilibrium_round_trip(tmp_path, fitted):
    summaries, model = fitted
    path = write(tmp_path, "e.txt", artifacts.dump_equilibrium(model))
    back = artifacts.load_equilibrium(path, summaries)
    assert back.equilibrium_positions.tobytes() == model.equilibrium_positions.tobytes()
    assert back.deltas.tobytes() == model.deltas.tobytes()
    assert back.history.tobytes() == model.history.tobytes()
    assert (back.k, back.converged, back.iterations_used, back.final_total_force, back.tolerance) == (
        model.k, model.converged, model.iterations_used, model.final_total_force, model.tolerance)
    # dumping again is byte-identical
    assert artifacts.dump_equilibrium(back) == path.read_text()


def test_checkpoint_round_trip(tmp_path):
    X = np.random.default_rng(1).random((30, 4))
    model = train(init_model(4, [6, 5], seed=2), X, X ** 2, TrainConfig.constant(1e-3, 4))
    path = write(tmp_path, "c.txt", artifacts.dump_checkpoint(model))
    back = artifacts.load_checkpoint(path)
    assert back.layer_sizes == model.layer_sizes and back.seed == 2 and back.epochs_completed == 4
    assert back.loss_history == model.loss_history
    for a, b in zip(model.weights + model.biases, back.weights + back.biases):
        assert a.tobytes() == b.tobytes()
    text = path.read_text()
    assert text.splitlines()[0] == "# format: checkpoint 1"
    assert [ln.split()[1] for ln in text.splitlines() if ln.startswith("loss ")] == ["0", "1", "2", "3"]


def test_loss_history_file(tmp_path):
    model = train(init_model(2), np.ones((4, 2)), np.zeros((4, 2)), TrainConfig.constant(1e-3, 3))
    path = write(tmp_path, "l.txt", artifacts.dump_loss_history(model))
    np.testing.assert_array_equal(artifacts.load_loss_history(path), model.loss_history)


def test_embeddings_round_trip(tmp_path):
    pts = np.random.default_rng(3).normal(size=(5, 3))
    path = write(tmp_path, "x.csv", artifacts.dump_embeddings([0, 1, 1, 2, 0], pts))
    labels, back = artifacts.load_embeddings(path)
    assert labels.tolist() == [0, 1, 1, 2, 0] and back.tobytes() == pts.tobytes()
    assert path.read_text().splitlines()[1] == "label,e_1,e_2,e_3"


@pytest.mark.parametrize("loader,kind", [
    (artifacts.load_summaries, "summaries"),
    (artifacts.load_checkpoint, "checkpoint"),
    (artifacts.load_loss_history, "loss-history"),
    (artifacts.load_manifest, "manifest"),
])
def test_unknown_version_rejected(tmp_path, loader, kind):
    path = write(tmp_path, "f.txt", f"# format: {kind} 2\n")
    with pytest.raises(FormatError):
        loader(path)
    path = write(tmp_path, "g.txt", "no header at all\n")
    with pytest.raises(FormatError):
        loader(path)


def test_missing_file_named(tmp_path):
    with pytest.raises(FileNotFoundError, match="checkpoint.txt"):
        artifacts.load_checkpoint(tmp_path / "checkpoint.txt")


def test_atomic_write_leaves_no_temp(tmp_path):
    artifacts.atomic_write(tmp_path / "a.txt", "one\n")
    artifacts.atomic_write(tmp_path / "a.txt", "two\n")
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
    assert (tmp_path / "a.txt").read_text() == "two\n"


def test_truncated_equilibrium(tmp_path, fitted):
    summaries, model = fitted
    text = artifacts.dump_equilibrium(model)
    path = write(tmp_path, "e.txt", "\n".join(text.splitlines()[:-1]) + "\n")
    with pytest.raises(FormatError):
        artifacts.load_equilibrium(path, summaries)
