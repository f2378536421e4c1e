import json
import math

import numpy as np
import pytest

from codemotion import (
    DatasetError,
    FilterSpec,
    SyntheticConfig,
    butterworth_filter,
    compute_descriptor,
    csm,
    generate_synthetic,
    load_dataset,
    load_manifest,
    save_dataset,
)
from oracles import pearson

from conftest import random_action


def write_dataset(tmp_path, files, name="tiny"):
    entries = []
    for filename, text, meta in files:
        (tmp_path / filename).write_text(text)
        entries.append({
            "path": filename,
            "class_label": meta.get("class_label", "c"),
            "subject_id": meta.get("subject_id", "s"),
            "action_id": meta.get("action_id", filename),
            "frame_rate": meta.get("frame_rate", 30.0),
            "angle_unit": meta.get("angle_unit", "deg"),
        })
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(json.dumps({"dataset_name": name, "entries": entries}))
    return manifest_path


class TestLoadDataset:
    def test_small_file(self, tmp_path):
        text = "1,2,3\n4,5,6\n7,8,9\n10,11,12\n"
        manifest = write_dataset(tmp_path, [("a.csv", text, {})])
        actions = load_dataset(manifest)
        assert len(actions) == 1
        assert actions[0].num_frames == 4
        assert actions[0].num_joints == 3
        assert actions[0].class_label == "c"

    def test_radians_converted_to_degrees(self, tmp_path):
        text = f"{math.pi},0\n0,{math.pi / 2}\n"
        manifest = write_dataset(tmp_path, [("a.csv", text, {"angle_unit": "rad"})])
        samples = load_dataset(manifest)[0].samples
        assert samples[0, 0] == pytest.approx(180.0, abs=1e-9)
        assert samples[1, 1] == pytest.approx(90.0, abs=1e-9)

    def test_ragged_row_names_file_and_line(self, tmp_path):
        manifest = write_dataset(tmp_path, [("bad.csv", "1,2\n3\n", {})])
        with pytest.raises(DatasetError, match=r"bad\.csv, line 2"):
            load_dataset(manifest)

    def test_non_numeric_cell_reported(self, tmp_path):
        manifest = write_dataset(tmp_path, [("bad.csv", "1,2\n3,oops\n", {})])
        with pytest.raises(DatasetError, match=r"line 2: non-numeric value 'oops'"):
            load_dataset(manifest)

    def test_missing_file_reported(self, tmp_path):
        manifest = write_dataset(tmp_path, [("a.csv", "1,2\n3,4\n", {})])
        (tmp_path / "a.csv").unlink()
        with pytest.raises(DatasetError, match="file not found"):
            load_dataset(manifest)

    def test_inconsistent_joint_count_rejected(self, tmp_path):
        manifest = write_dataset(tmp_path, [
            ("a.csv", "1,2\n3,4\n", {"action_id": "a"}),
            ("b.csv", "1,2,3\n4,5,6\n", {"action_id": "b"}),
        ])
        with pytest.raises(DatasetError, match="joint columns"):
            load_dataset(manifest)

    def test_header_row_auto_detected(self, tmp_path):
        manifest = write_dataset(tmp_path, [("a.csv", "hip,knee\n1,2\n3,4\n", {})])
        action = load_dataset(manifest)[0]
        assert action.num_frames == 2
        np.testing.assert_array_equal(action.samples, [[1, 2], [3, 4]])

    def test_crlf_accepted(self, tmp_path):
        manifest = write_dataset(tmp_path, [("a.csv", "1,2\r\n3,4\r\n", {})])
        np.testing.assert_array_equal(load_dataset(manifest)[0].samples, [[1, 2], [3, 4]])

    def test_duplicate_action_id_rejected(self, tmp_path):
        manifest = write_dataset(tmp_path, [
            ("a.csv", "1,2\n3,4\n", {"action_id": "same"}),
            ("b.csv", "1,2\n3,4\n", {"action_id": "same"}),
        ])
        with pytest.raises(DatasetError, match="duplicate action_id"):
            load_manifest(manifest)

    def test_bad_frame_rate_rejected(self, tmp_path):
        manifest = write_dataset(tmp_path, [("a.csv", "1,2\n3,4\n", {"frame_rate": 0})])
        with pytest.raises(DatasetError, match="frame_rate"):
            load_manifest(manifest)

    def test_missing_manifest_key_reported(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"dataset_name": "x", "entries": [{"path": "a.csv"}]}))
        with pytest.raises(DatasetError, match="missing required key"):
            load_manifest(path)

    def test_non_finite_cell_rejected(self, tmp_path):
        manifest = write_dataset(tmp_path, [("a.csv", "1,2\nnan,4\n", {})])
        with pytest.raises(DatasetError, match="non-finite"):
            load_dataset(manifest)


class TestButterworthFilter:
    def test_constant_column_unchanged(self):
        action = random_action(np.random.default_rng(0), joints=2, frames=200, frame_rate=120.0)
        constant = action.with_samples(np.full((200, 2), 17.0))
        filtered = butterworth_filter(constant, FilterSpec(cutoff_hz=10.0))
        np.testing.assert_allclose(filtered.samples, constant.samples, atol=1e-9)

    def test_passband_sinusoid_preserved(self):
        fs, f = 120.0, 1.0
        t = np.arange(int(fs * 6)) / fs
        x = 25.0 * np.sin(2 * np.pi * f * t)
        action = random_action(np.random.default_rng(0), joints=1, frames=t.size, frame_rate=fs)
        filtered = butterworth_filter(action.with_samples(x[:, None]), FilterSpec(cutoff_hz=10.0))
        trim = int(fs)  # drop one second per edge
        measured = np.abs(filtered.samples[trim:-trim, 0]).max()
        assert abs(measured - 25.0) / 25.0 < 0.01

    def test_stopband_sinusoid_attenuated(self):
        fs, f, order, cutoff = 120.0, 50.0, 2, 10.0
        t = np.arange(int(fs * 6)) / fs
        x = 25.0 * np.sin(2 * np.pi * f * t)
        action = random_action(np.random.default_rng(0), joints=1, frames=t.size, frame_rate=fs)
        filtered = butterworth_filter(
            action.with_samples(x[:, None]), FilterSpec(cutoff_hz=cutoff, order=order)
        )
        trim = int(fs)
        measured_gain = np.abs(filtered.samples[trim:-trim, 0]).max() / 25.0
        # analytic magnitude oracle: one pass gives 1/sqrt(1 + (f/fc)^(2n)),
        # forward-backward squares it; the digital filter attenuates at least as much
        analytic_gain = (1.0 / math.sqrt(1.0 + (f / cutoff) ** (2 * order))) ** 2
        assert measured_gain <= 0.01
        assert measured_gain <= analytic_gain * 1.05

    def test_cutoff_at_or_above_nyquist_rejected(self, rng):
        action = random_action(rng, frames=50, frame_rate=30.0)
        with pytest.raises(ValueError, match="Nyquist"):
            butterworth_filter(action, FilterSpec(cutoff_hz=15.0))

    def test_linearity(self, rng):
        a = random_action(rng, joints=3, frames=150, frame_rate=60.0)
        b = random_action(rng, joints=3, frames=150, frame_rate=60.0)
        spec = FilterSpec(cutoff_hz=10.0)
        combined = butterworth_filter(a.with_samples(a.samples + b.samples), spec)
        separate = butterworth_filter(a, spec).samples + butterworth_filter(b, spec).samples
        np.testing.assert_allclose(combined.samples, separate, atol=1e-9)

    def test_causal_mode_runs(self, rng):
        action = random_action(rng, joints=2, frames=100, frame_rate=60.0)
        filtered = butterworth_filter(action, FilterSpec(cutoff_hz=10.0, zero_phase=False))
        assert filtered.samples.shape == action.samples.shape

    def test_short_signal_supported(self):
        action = random_action(np.random.default_rng(1), joints=2, frames=5, frame_rate=60.0)
        filtered = butterworth_filter(action, FilterSpec(cutoff_hz=10.0))
        assert filtered.num_frames == 5

    def test_bad_spec_rejected(self):
        with pytest.raises(ValueError):
            FilterSpec(cutoff_hz=0.0)
        with pytest.raises(ValueError):
            FilterSpec(order=0)


class TestGenerateSynthetic:
    def test_same_seed_is_bit_identical(self):
        config = SyntheticConfig(classes=3, per_class=2, subjects=2, joints=10, frames=50, seed=4)
        actions1, manifest1 = generate_synthetic(config)
        actions2, manifest2 = generate_synthetic(config)
        assert manifest1.entries == manifest2.entries
        for a, b in zip(actions1, actions2):
            np.testing.assert_array_equal(a.samples, b.samples)

    def test_entry_count(self):
        config = SyntheticConfig(classes=3, per_class=4, subjects=2, joints=8, frames=30, seed=0)
        actions, manifest = generate_synthetic(config)
        assert len(actions) == len(manifest.entries) == 3 * 4 * 2

    def test_in_phase_pair_strongly_correlated(self):
        config = SyntheticConfig(classes=2, per_class=2, subjects=1, joints=10, frames=120, seed=8)
        actions, _ = generate_synthetic(config)
        # the first two active joints of each class are forced in phase
        action = actions[0]
        variances = action.samples.var(axis=0)
        top = np.argsort(-variances)[: config.num_active]
        i, j = sorted(top.tolist())[:2]
        c = pearson(list(action.samples[:, i]), list(action.samples[:, j]))
        assert abs(c) >= 0.9

    def test_disjoint_two_class_loo_is_perfect(self):
        config = SyntheticConfig(
            classes=2, per_class=4, subjects=2, joints=12, frames=90,
            seed=3, active_per_class=3, disjoint_classes=True,
        )
        actions, _ = generate_synthetic(config)
        descs = [compute_descriptor(a, 3) for a in actions]
        labels = [a.class_label for a in actions]
        # full enumeration: cross-class scores are exactly zero, within-class positive
        correct = 0
        for i in range(len(actions)):
            scores = [csm(descs[i], descs[j]) if j != i else -1.0 for j in range(len(actions))]
            best = int(np.argmax(scores))
            correct += labels[best] == labels[i]
            for j in range(len(actions)):
                if j != i and labels[j] != labels[i]:
                    assert scores[j] == 0.0
        assert correct == len(actions)

    def test_disjoint_infeasible_config_rejected(self):
        with pytest.raises(ValueError, match="disjoint"):
            SyntheticConfig(classes=5, per_class=1, subjects=1, joints=8,
                            active_per_class=2, disjoint_classes=True)

    def test_counts_validated(self):
        with pytest.raises(ValueError):
            SyntheticConfig(classes=0, per_class=1, subjects=1)
        with pytest.raises(ValueError):
            SyntheticConfig(classes=1, per_class=1, subjects=1, joints=3)


class TestRoundTrip:
    def test_save_then_load_is_value_identical(self, tmp_path):
        config = SyntheticConfig(classes=2, per_class=2, subjects=2, joints=6, frames=40, seed=9)
        actions, manifest = generate_synthetic(config)
        manifest_path = save_dataset(actions, manifest, tmp_path / "data")
        loaded = load_dataset(manifest_path)
        assert len(loaded) == len(actions)
        for original, reread in zip(actions, loaded):
            np.testing.assert_array_equal(reread.samples, original.samples)
            assert reread.class_label == original.class_label
            assert reread.subject_id == original.subject_id
            assert reread.action_id == original.action_id
            assert reread.frame_rate == original.frame_rate
