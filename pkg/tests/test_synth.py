import io

import numpy as np
import pytest

from ftuaudit import logreg, synth
from ftuaudit.audit import read_table


def _dbr(data):
    y, g = data.labels, data.groups
    return y[g == 0].mean() - y[g == 1].mean()


class TestGenerate:
    @pytest.mark.parametrize("profile", synth.PROFILES)
    def test_zero_offset_gives_no_base_rate_gap(self, profile):
        data, meta = synth.generate(profile, 50_000, group_offset=0.0, seed=3)
        assert meta.group_offset == 0.0
        y, g = data.labels, data.groups
        pa, pb = y[g == 0].mean(), y[g == 1].mean()
        p = y.mean()
        sigma = np.sqrt(p * (1 - p) * (1 / (g == 0).sum() + 1 / (g == 1).sum()))
        assert abs(pa - pb) < 3 * sigma

    @pytest.mark.parametrize("profile", synth.PROFILES)
    def test_default_offset_disadvantages_b(self, profile):
        data, meta = synth.generate(profile, 20_000, seed=0)
        assert meta.group_offset == synth.DEFAULT_OFFSET[profile]
        assert _dbr(data) > 0.02

    def test_deterministic_given_seed(self):
        a, _ = synth.generate("almp-like", 500, seed=11)
        b, _ = synth.generate("almp-like", 500, seed=11)
        c, _ = synth.generate("almp-like", 500, seed=12)
        assert np.array_equal(a.features, b.features) and np.array_equal(a.labels, b.labels)
        assert not np.array_equal(a.labels, c.labels)

    def test_unknown_profile(self):
        with pytest.raises(ValueError, match="unknown profile"):
            synth.generate("census", 10)

    def test_n_must_be_positive(self):
        with pytest.raises(ValueError):
            synth.generate("income-like", 0)

    def test_single_row(self):
        data, _ = synth.generate("employment-like", 1, seed=0)
        assert len(data) == 1


@pytest.mark.slow
class TestCalibration:
    def test_dbr_target(self):
        data, meta = synth.generate("income-like", 200_000, dbr_target=0.15, seed=5)
        assert abs(_dbr(data) - 0.15) < 0.02
        assert meta.group_offset < 0

    def test_aware_lr_recovers_offset(self):
        data, meta = synth.generate("income-like", 200_000, group_offset=-0.86, seed=2)
        model = logreg.train(data, aware=True)
        assert model.converged
        assert abs(model.pa_coefficient - (-0.86)) < 0.1
        for name, c in zip(model.feature_names, model.coefficients):
            if name in meta.coefficients:
                assert abs(c - meta.coefficients[name]) < 0.1, name


class TestCsv:
    def test_header_round_trip(self, tmp_path):
        data, meta = synth.generate("income-like", 200, seed=4)
        path = tmp_path / "d.csv"
        synth.write_csv(path, data, meta)
        lines = [l for l in path.read_text().splitlines() if l.startswith("#")]
        assert synth.SynthMeta.from_header(lines) == meta

    def test_rows_round_trip_through_reader(self, tmp_path):
        data, meta = synth.generate("almp-like", 300, seed=4)
        path = tmp_path / "d.csv"
        synth.write_csv(path, data, meta)
        tab = read_table(path, group_a="A")
        assert tab.data.feature_names == data.feature_names
        assert np.array_equal(tab.data.features, data.features)
        assert np.array_equal(tab.data.groups, data.groups)
        assert np.array_equal(tab.data.labels, data.labels)

    def test_stream_matches_file(self, tmp_path):
        data, meta = synth.generate("employment-like", 50, seed=1)
        buf = io.StringIO()
        synth.write_csv(buf, data, meta)
        path = tmp_path / "d.csv"
        synth.write_csv(path, data, meta)
        assert buf.getvalue() == path.read_text()
