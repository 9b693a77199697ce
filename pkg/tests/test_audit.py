import json
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from ftuaudit import audit, oracle, synth
from ftuaudit.audit import AuditConfig, DataError

DOCS = Path(__file__).resolve().parents[1] / "docs"
FIXTURES = Path(__file__).resolve().parent / "fixtures"


def _csv(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _synth_csv(tmp_path, profile="income-like", n=3000, seed=0, **kw):
    data, meta = synth.generate(profile, n, seed=seed, **kw)
    p = tmp_path / f"{profile}-{seed}.csv"
    synth.write_csv(p, data, meta)
    return p


def _scores_csv(tmp_path, name, ids, groups, scores, labels):
    lines = ["row_id,group,score,label"]
    lines += [f"{i},{g},{float(s)!r},{y}" for i, g, s, y in zip(ids, groups, scores, labels)]
    return _csv(tmp_path, "\n".join(lines) + "\n", name)


@pytest.fixture
def small_csv(tmp_path):
    return _synth_csv(tmp_path, n=2000, seed=1)


@pytest.fixture
def score_files(tmp_path):
    rng = np.random.default_rng(0)
    n = 400
    groups = np.where(rng.uniform(size=n) < 0.4, "B", "A")
    scores = rng.uniform(size=n)
    labels = (rng.uniform(size=n) < scores).astype(int)
    ids = rng.permutation(n)
    return groups, scores, labels, ids


class TestReadTable:
    def test_missing_column(self, tmp_path):
        p = _csv(tmp_path, "x,group\n1,A\n2,B\n")
        with pytest.raises(DataError, match="missing column 'label'"):
            audit.read_table(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            audit.read_table(tmp_path / "nope.csv")

    def test_non_binary_label(self, tmp_path):
        p = _csv(tmp_path, "x,group,label\n1,A,0\n2,B,1\n3,A,2\n")
        with pytest.raises(DataError, match="must be binary"):
            audit.read_table(p)

    def test_non_binary_group(self, tmp_path):
        p = _csv(tmp_path, "x,group,label\n1,A,0\n2,B,1\n3,C,1\n")
        with pytest.raises(DataError, match="'group' must be binary"):
            audit.read_table(p)

    def test_single_group(self, tmp_path):
        p = _csv(tmp_path, "x,group,label\n1,A,0\n2,A,1\n")
        with pytest.raises(DataError, match="single group"):
            audit.read_table(p)

    def test_non_numeric_feature_names_row(self, tmp_path):
        p = _csv(tmp_path, "x,group,label\n1,A,0\nabc,B,1\n")
        with pytest.raises(DataError, match=r"'x'.*'abc'.*row 2"):
            audit.read_table(p)

    def test_unknown_feature(self, tmp_path):
        p = _csv(tmp_path, "x,group,label\n1,A,0\n2,B,1\n")
        with pytest.raises(DataError, match="unknown feature"):
            audit.read_table(p, features=["y"])

    def test_string_labels_second_value_positive(self, tmp_path):
        p = _csv(tmp_path, "x,g,y\n1,m,no\n2,f,yes\n3,m,yes\n")
        tab = audit.read_table(p, group_col="g", label_col="y")
        assert tab.label_names == {0: "no", 1: "yes"}
        assert tab.data.labels.tolist() == [0, 1, 1]

    def test_positive_label_override(self, tmp_path):
        p = _csv(tmp_path, "x,g,y\n1,m,no\n2,f,yes\n3,m,yes\n")
        tab = audit.read_table(p, group_col="g", label_col="y", positive_label="no")
        assert tab.data.labels.tolist() == [1, 0, 0]

    def test_group_a_is_higher_base_rate(self, tmp_path):
        p = _csv(tmp_path, "x,g,label\n1,m,0\n2,f,1\n3,m,0\n4,f,1\n5,m,1\n")
        tab = audit.read_table(p, group_col="g")
        assert tab.group_names == {"A": "f", "B": "m"}
        assert tab.data.groups.tolist() == [1, 0, 1, 0, 1]

    def test_group_a_override(self, tmp_path):
        p = _csv(tmp_path, "x,g,label\n1,m,0\n2,f,1\n3,m,0\n4,f,1\n5,m,1\n")
        tab = audit.read_table(p, group_col="g", group_a="m")
        assert tab.group_names == {"A": "m", "B": "f"}
        with pytest.raises(DataError, match="does not occur"):
            audit.read_table(p, group_col="g", group_a="x")

    def test_comments_and_hash(self, tmp_path):
        p = _csv(tmp_path, "# a comment\nx,group,label\n1,A,1\n2,B,0\n")
        tab = audit.read_table(p)
        assert len(tab.data) == 2
        assert tab.sha256 == audit.file_sha256(p)
        assert len(tab.sha256) == 64


class TestSplits:
    def test_partition(self):
        for tr, te in audit.make_splits(100, k=5, test_frac=0.3, seed=2):
            assert len(te) == 30 and len(tr) == 70
            assert sorted(np.concatenate([tr, te]).tolist()) == list(range(100))

    def test_deterministic_and_prefix_stable(self):
        a = audit.make_splits(50, k=3, seed=9)
        b = audit.make_splits(50, k=5, seed=9)
        for (tr1, te1), (tr2, te2) in zip(a, b):
            assert np.array_equal(tr1, tr2) and np.array_equal(te1, te2)
        c = audit.make_splits(50, k=3, seed=10)
        assert not np.array_equal(a[0][1], c[0][1])

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            audit.make_splits(10, k=0)
        with pytest.raises(ValueError):
            audit.make_splits(10, test_frac=1.0)
        with pytest.raises(DataError):
            audit.make_splits(1, test_frac=0.3)

    def test_worker_env(self, monkeypatch):
        monkeypatch.setenv(audit.WORKERS_ENV, "3")
        assert audit.worker_count() == 3
        monkeypatch.setenv(audit.WORKERS_ENV, "many")
        with pytest.raises(DataError):
            audit.worker_count()


class TestAuditReport:
    @pytest.fixture
    def report(self, small_csv):
        return audit.audit_table(audit.read_table(small_csv), AuditConfig(splits=2, eps_grid=(Fraction(1, 100),)))

    def test_byte_stable(self, small_csv, report):
        again = audit.audit_table(audit.read_table(small_csv), AuditConfig(splits=2, eps_grid=(Fraction(1, 100),)))
        assert again.to_json() == report.to_json()
        assert again.summary_csv() == report.summary_csv()

    def test_parallel_matches_serial(self, small_csv, report, monkeypatch):
        monkeypatch.setenv(audit.WORKERS_ENV, "2")
        par = audit.audit_table(audit.read_table(small_csv), AuditConfig(splits=2, eps_grid=(Fraction(1, 100),)))
        assert par.to_json() == report.to_json()

    def test_json_round_trip(self, report):
        back = audit.AuditReport.from_json(report.to_json())
        assert back == report
        assert back.to_json() == report.to_json()

    def test_schema(self, report):
        schema = json.loads((DOCS / "audit_report.schema.json").read_text())
        jsonschema.validate(json.loads(report.to_json()), schema)

    def test_contents(self, report, small_csv):
        md = report.metadata
        assert md["sha256"]["dataset"] == audit.file_sha256(small_csv)
        assert md["config"]["splits"] == 2
        assert len(report.splits) == 2 and report.aggregate["n_splits"] == 2
        for s in report.splits:
            for m in (s.aware, s.unaware):
                assert 0 <= m.accuracy <= 1 and 0 <= m.rate_A <= 1 and 0 <= m.rate_B <= 1
                assert m.di == pytest.approx(m.rate_A - m.rate_B)
                assert m.abs_di == pytest.approx(abs(m.di))
            assert s.aware.coefficient_zeroing is not None
            assert s.unaware.coefficient_zeroing is None
            assert s.relative_accuracy_reduction == pytest.approx(
                (s.aware.accuracy - s.unaware.accuracy) / s.aware.accuracy)
            assert s.relative_di_reduction == pytest.approx((s.aware.abs_di - s.unaware.abs_di) / s.aware.abs_di)
            # the DI gap between two classifiers never exceeds what their disagreement allows
            assert abs(s.aware.di - s.unaware.di) <= s.di_difference_bound + 1e-12
            assert len(s.bounds) == 1 and s.bounds[0]["epsilon"] == "1/100"

    def test_summary_csv_shape(self, report):
        lines = report.summary_csv().splitlines()
        assert lines[0].startswith("split,aware_accuracy")
        assert [l.split(",")[0] for l in lines[1:]] == ["0", "1", "mean"]

    def test_unknown_feature_selection(self, small_csv):
        with pytest.raises(DataError):
            audit.audit_table(audit.read_table(small_csv), AuditConfig(splits=1, features=("nope",)))


class TestSingleFeature:
    def test_group_b_needs_higher_feature_value(self, tmp_path):
        p = _synth_csv(tmp_path, n=6000, seed=3)
        rep = audit.audit_table(audit.read_table(p), AuditConfig(splits=2, features=("education",)))
        for s in rep.splits:
            t = s.aware.thresholds
            assert t["B"] > t["A"]
            u = s.unaware.thresholds
            assert u["A"] == u["B"]

    def test_no_thresholds_with_many_features(self, small_csv):
        rep = audit.audit_table(audit.read_table(small_csv), AuditConfig(splits=1))
        assert rep.splits[0].aware.thresholds is None


class TestScores:
    def test_identical_files_give_zero_deltas(self, tmp_path, score_files):
        g, s, y, ids = score_files
        pa = _scores_csv(tmp_path, "a.csv", ids, g, s, y)
        pu = _scores_csv(tmp_path, "u.csv", ids, g, s, y)
        a, u = audit.read_scores(pa), audit.read_scores(pu)
        rep = audit.audit_scores(a, u, AuditConfig(model="scores"))
        sp = rep.splits[0]
        assert sp.relative_accuracy_reduction == 0
        assert sp.relative_di_reduction == 0
        assert sp.disagreement == 0
        assert sp.aware == sp.unaware
        jsonschema.validate(json.loads(rep.to_json()),
                            json.loads((DOCS / "audit_report.schema.json").read_text()))

    def test_rows_sorted_by_id(self, tmp_path, score_files):
        g, s, y, ids = score_files
        sf = audit.read_scores(_scores_csv(tmp_path, "a.csv", ids, g, s, y))
        assert np.array_equal(sf.row_ids, np.arange(len(ids)))
        assert sf.scores[ids[0]] == s[0]

    def test_duplicate_ids(self, tmp_path):
        p = _scores_csv(tmp_path, "a.csv", [1, 1], ["A", "B"], [0.2, 0.3], [0, 1])
        with pytest.raises(DataError, match="unique"):
            audit.read_scores(p)

    def test_scores_out_of_range(self, tmp_path):
        p = _scores_csv(tmp_path, "a.csv", [1, 2], ["A", "B"], [0.2, 1.3], [0, 1])
        with pytest.raises(DataError, match=r"\[0, 1\]"):
            audit.read_scores(p)

    def test_missing_score_column(self, tmp_path):
        p = _csv(tmp_path, "row_id,group,label\n1,A,0\n")
        with pytest.raises(DataError, match="score"):
            audit.read_scores(p)

    def test_mismatched_pair(self, tmp_path, score_files):
        g, s, y, ids = score_files
        a = audit.read_scores(_scores_csv(tmp_path, "a.csv", ids, g, s, y))
        u = audit.read_scores(_scores_csv(tmp_path, "u.csv", ids[:-1], g[:-1], s[:-1], y[:-1]))
        with pytest.raises(DataError, match="same row ids"):
            audit.check_score_pair(a, u)
        y2 = y.copy()
        y2[0] = 1 - y2[0]
        u = audit.read_scores(_scores_csv(tmp_path, "u2.csv", ids, g, s, y2))
        with pytest.raises(DataError, match="labels"):
            audit.check_score_pair(a, u)


class TestPolicy:
    def test_tau_one_gives_zero_gap(self, tmp_path, score_files):
        g, s, y, ids = score_files
        s = np.minimum(s, 0.999)
        a = audit.read_scores(_scores_csv(tmp_path, "a.csv", ids, g, s, y))
        rep = audit.policy_eval_scores(a, a, tau=1.0)
        for mode in ("aware", "unaware"):
            assert rep.splits[0][mode]["delta"] == 0

    def test_auroc_invariant_to_monotone_rescaling(self, tmp_path, score_files):
        g, s, y, ids = score_files
        a = audit.read_scores(_scores_csv(tmp_path, "a.csv", ids, g, s, y))
        u = audit.read_scores(_scores_csv(tmp_path, "u.csv", ids, g, s ** 3, y))
        rep = audit.policy_eval_scores(a, u, tau=0.25)
        assert rep.splits[0]["aware"]["auroc"] == rep.splits[0]["unaware"]["auroc"]

    def test_c_rates_count_scores_below_tau(self, tmp_path):
        p = _scores_csv(tmp_path, "a.csv", range(6), list("AAABBB"), [0.1, 0.3, 0.9, 0.1, 0.2, 0.5], [0, 1, 1, 0, 0, 1])
        sf = audit.read_scores(p)
        row = audit.policy_eval_scores(sf, sf, tau=0.25).splits[0]["aware"]
        assert row["c_rate_A"] == pytest.approx(1 / 3)
        assert row["c_rate_B"] == pytest.approx(2 / 3)
        assert row["delta"] == pytest.approx(1 / 3)

    def test_report_shape(self, tmp_path):
        p = _synth_csv(tmp_path, "almp-like", n=3000, seed=2)
        rep = audit.policy_eval_table(audit.read_table(p), tau=0.25, k=3)
        text = rep.table()
        head = text.splitlines()[1].split()
        assert head[-2:] == ["Delta", "AUROC"]
        rows = text.splitlines()[2:]
        assert [r.split()[1] for r in rows] == ["aware", "unaware"]
        assert all(r.count("±") == 4 for r in rows)
        assert rep.summary["n_splits"] == 3
        for sp in rep.splits:
            for mode in ("aware", "unaware"):
                assert sp[mode]["delta"] == pytest.approx(abs(sp[mode]["c_rate_B"] - sp[mode]["c_rate_A"]))
        back = audit.PolicyReport.from_json(rep.to_json())
        assert back == rep
        jsonschema.validate(json.loads(rep.to_json()),
                            json.loads((DOCS / "policy_report.schema.json").read_text()))


class TestBounds:
    def test_toy_breakpoints(self):
        dist = audit.load_distribution(FIXTURES / "example1.json")
        eps = [audit.parse_eps(e) for e in ("0.025", "0.075", "0.125")]
        rows = audit.bound_rows(dist, eps, with_oracle=True)
        assert [r["bound"] for r in rows] == ["1/4", "1/2", "3/4"]
        assert [r["oracle_max"] for r in rows] == ["1/4", "1/2", "3/4"]
        assert all(r["verdict"] == oracle.Verdict.TIGHT.value for r in rows)
        for r in rows:
            assert Fraction(r["legacy_bound"]) >= Fraction(r["bound"])

    def test_zero_epsilon(self):
        dist = audit.load_distribution(FIXTURES / "example1.json")
        assert audit.bound_rows(dist, [Fraction(0)])[0]["bound"] == "0"

    def test_cap(self):
        dist = audit.load_distribution(FIXTURES / "example1.json")
        with pytest.raises(oracle.EnumerationCapExceeded):
            audit.bound_rows(dist, [Fraction(1, 10)], with_oracle=True, cap=2)

    def test_csv_columns(self):
        dist = audit.load_distribution(FIXTURES / "example1.json")
        text = audit.bounds_csv(audit.bound_rows(dist, [Fraction(1, 40)]))
        assert text.splitlines()[0] == "epsilon,lambda_eps,bound,legacy_bound,achieved_accuracy"

    def test_bad_json(self, tmp_path):
        p = _csv(tmp_path, "{not json", "d.json")
        with pytest.raises(DataError):
            audit.load_distribution(p)

    @pytest.mark.parametrize("text,value", [("0.025", Fraction(1, 40)), ("1/8", Fraction(1, 8)), (" 0 ", Fraction(0))])
    def test_parse_eps(self, text, value):
        assert audit.parse_eps(text) == value

    @pytest.mark.parametrize("text", ["-0.1", "abc", "1/0"])
    def test_parse_eps_rejects(self, text):
        with pytest.raises(ValueError):
            audit.parse_eps(text)
