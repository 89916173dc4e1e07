import numpy as np
import pytest

from idsaug import leveling, synthbench
from idsaug.errors import ConfigError


def test_counts_are_exact_and_ratios_follow():
    spec = synthbench.default_spec((20000, 100, 10), dim=6, seed=0)
    ds = synthbench.generate_dataset(spec)
    counts = {ds.label_names[c]: n for c, n in ds.class_counts().items()}
    assert counts == {"class_0": 20000, "class_1": 100, "class_2": 10}
    irs = leveling.imbalance_ratios(ds.class_counts())
    by_name = {ds.label_names[c]: v for c, v in irs.items()}
    assert by_name["class_0"] == 1.0
    assert by_name["class_1"] == pytest.approx(200.0)
    assert by_name["class_2"] == pytest.approx(2000.0)


def test_same_seed_writes_identical_files(tmp_path):
    spec = synthbench.default_spec((500, 30, 5), dim=4, seed=9)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    synthbench.write_bench_csv(a, spec)
    synthbench.write_bench_csv(b, spec)
    assert a.read_bytes() == b.read_bytes()


def test_different_seeds_differ(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    synthbench.write_bench_csv(a, synthbench.default_spec((100, 10, 3), dim=4, seed=1))
    synthbench.write_bench_csv(b, synthbench.default_spec((100, 10, 3), dim=4, seed=2))
    assert a.read_bytes() != b.read_bytes()


def test_dim_controls_feature_columns(tmp_path):
    spec = synthbench.default_spec((50, 8, 2), dim=78, seed=0)
    path = tmp_path / "wide.csv"
    synthbench.write_bench_csv(path, spec)
    header = path.read_text().splitlines()[0].split(",")
    assert len(header) == 79  # 78 features plus the label column


def test_nonpositive_count_rejected():
    with pytest.raises(ConfigError):
        synthbench.default_spec((100, 0, 5), dim=4, seed=0)


def test_geometry_fixed_across_seeds():
    a = synthbench.default_spec((10, 5, 2), dim=6, seed=1)
    b = synthbench.default_spec((10, 5, 2), dim=6, seed=2)
    for ca, cb in zip(a.classes, b.classes):
        for comp_a, comp_b in zip(ca.components, cb.components):
            assert np.array_equal(comp_a.center, comp_b.center)
