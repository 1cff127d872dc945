import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superpareto.exceptions import DomainError, InsufficientDataError, SchemaError
from superpareto.records import (
    Panel,
    ProductivityRecord,
    aggregate,
    aggregate_weighted,
    ingest_csv,
    write_csv,
)
from superpareto.synth import SynthConfig, synth_periods, synth_generate


def rec(fid, y, l, sector="S0", year=2000):
    return ProductivityRecord(fid, year, sector, y, l)


def test_productivity_definition():
    assert rec("a", 100e6, 50).c == 2e6


@pytest.mark.parametrize("l", [0, -3, 2.5])
def test_record_rejects_bad_employees(l):
    with pytest.raises(DomainError):
        rec("a", 10.0, l)


def test_record_rejects_bad_sales():
    with pytest.raises(DomainError):
        rec("a", -1.0, 3)


def write(tmp_path, text):
    p = tmp_path / "in.csv"
    p.write_text(text)
    return p


def test_ingest_basic(tmp_path):
    p = write(tmp_path, "firm_id,year,sector_id,sales_yen,employees\nA,2001,S1,100000000,50\n")
    panel = ingest_csv(p)
    assert len(panel) == 1
    r = panel[0]
    assert (r.firm_id, r.year, r.sector_id, r.employees, r.c) == ("A", 2001, "S1", 50, 2e6)


def test_ingest_rejects_rows(tmp_path, caplog):
    text = (
        "firm_id,year,sector_id,sales_yen,employees\n"
        "A,2001,S1,100,0\n"
        "B,2001,S1,-5,3\n"
        "C,2001,S1,abc,3\n"
        "D,2001,S1,60,3\n"
        "E,2001,S1,60,2.5\n"
    )
    panel = ingest_csv(write(tmp_path, text))
    assert len(panel) == 1 and panel[0].firm_id == "D"
    lines = [line for line, _ in panel.rejected]
    assert lines == [2, 3, 4, 6]
    assert "division by zero" in panel.rejected[0][1]
    assert "row rejected" in caplog.text


def test_ingest_missing_column(tmp_path):
    with pytest.raises(SchemaError):
        ingest_csv(write(tmp_path, "firm_id,year,sales_yen,employees\nA,1,2,3\n"))


def test_round_trip_bit_exact(tmp_path):
    panel = synth_generate(SynthConfig(K=100, N=1000, periods=20, seed=3))
    panel = panel[:1000]
    out = write_csv(panel, tmp_path / "p.csv")
    back = ingest_csv(out)
    assert back == panel
    np.testing.assert_array_equal(back.c, panel.c)


def test_panel_indexing():
    recs = [rec("a", 10.0, 1), rec("b", 20.0, 2), rec("c", 30.0, 3, year=2001)]
    panel = Panel.from_records(recs)
    assert panel[-1] == recs[-1]
    assert list(panel) == recs
    assert len(panel[panel.year == 2000]) == 2
    assert panel.years() == [2000, 2001]
    with pytest.raises(IndexError):
        panel[3]


def test_canonical_is_order_free():
    recs = [rec(f"f{i}", 10.0 + i, 1 + i % 3) for i in range(20)]
    a = Panel.from_records(recs).canonical()
    b = Panel.from_records(recs[::-1]).canonical()
    assert a == b


class TestAggregate:
    firms = [rec("a", 100.0, 10), rec("b", 50.0, 5)]

    def test_sector_ratio_of_sums(self):
        np.testing.assert_array_equal(aggregate(self.firms, "sector"), [10.0])

    def test_worker_replication(self):
        w = aggregate(self.firms, "worker")
        assert len(w) == 15 and np.all(w == 10.0)

    def test_firm_one_per_firm(self):
        recs = [rec("a", 100.0, 10), rec("a", 60.0, 2), rec("b", 9.0, 3)]
        np.testing.assert_allclose(sorted(aggregate(recs, "firm")), [3.0, 160.0 / 12])

    def test_weighted_matches_replicated(self):
        recs = [rec(f"f{i}", 7.0 * (i + 1) ** 1.5, i + 1) for i in range(30)]
        v, w = aggregate_weighted(recs, "worker")
        np.testing.assert_array_equal(np.repeat(v, w.astype(int)), np.sort(aggregate(recs, "worker")))

    def test_empty(self):
        with pytest.raises(InsufficientDataError):
            aggregate([], "firm")

    def test_bad_level(self):
        with pytest.raises(ValueError):
            aggregate(self.firms, "country")

    def test_worker_mean_is_demand(self):
        cfg = SynthConfig(K=200, N=5000, periods=1, seed=1)
        levels, allocs = synth_periods(cfg)
        panel = synth_generate(cfg)
        counts = allocs[0].counts
        want = float(np.sum(counts * levels) / cfg.N)
        assert aggregate(panel, "worker").mean() == pytest.approx(want, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.floats(1.0, 1e9), st.integers(1, 1000)), min_size=1, max_size=40))
def test_worker_total_equals_employees(rows):
    recs = [rec(f"f{fid}", y, l, sector=f"s{fid % 2}") for fid, y, l in rows]
    assert len(aggregate(recs, "worker")) == sum(l for _, _, l in rows)
    sector = aggregate(recs, "sector")
    assert len(sector) == len({fid % 2 for fid, _, _ in rows})
