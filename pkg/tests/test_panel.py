import numpy as np
import pandas as pd
import pytest

from netfx.errors import ConfigError, IdentifiabilityError
from netfx.graph import is_valid_adjustment
from netfx.panel import (PanelSchema, expand_network, ingest_frame, ingest_panel, mask_study_graph,
                         mask_study_schema, observational_table, read_adjacency, run_observational,
                         synthetic_panel)


@pytest.fixture(scope="module")
def fixture():
    return synthetic_panel(seed=0)


@pytest.fixture(scope="module")
def panel(fixture):
    return ingest_frame(fixture.frame, fixture.unit_edges, mask_study_schema())


class TestIngest:
    def test_usable_rows(self, panel):
        assert panel.n_rows == 26 * (24 - 4) and panel.n_dropped == 26 * 4
        assert panel.dataset.n_units == 520 and panel.units[:3] == ["1", "2", "3"]

    def test_lead_and_lag_columns(self, fixture, panel):
        f = fixture.frame
        g = f.set_index(["unit", "period"])["G"]
        row = panel.frame.iloc[7]
        u, t = row["unit"], row["period"]
        assert row["Y"] == g[(u, t + 2)] and row["J"] == g[(u, t - 2)]
        assert panel.frame["period"].min() == 3 and panel.frame["period"].max() == 22

    def test_files_roundtrip(self, fixture, panel, tmp_path):
        data, adj = fixture.write(tmp_path)
        again = ingest_panel(data, adj, mask_study_schema())
        assert np.array_equal(again.dataset.Y, panel.dataset.Y)
        assert np.array_equal(again.dataset.X, panel.dataset.X)

    def test_unknown_unit_in_adjacency(self, fixture, tmp_path):
        data, adj = fixture.write(tmp_path)
        adj.write_text(adj.read_text() + "1\t99\n")
        with pytest.raises(ConfigError, match="unknown unit"):
            ingest_panel(data, adj, mask_study_schema())

    def test_malformed_adjacency_line(self, tmp_path):
        path = tmp_path / "a.tsv"
        path.write_text("1\t2\t3\n")
        with pytest.raises(ConfigError):
            read_adjacency(path, ["1", "2", "3"])

    def test_duplicate_rows(self, fixture):
        df = pd.concat([fixture.frame, fixture.frame.iloc[[5]]])
        with pytest.raises(ConfigError, match="duplicate"):
            ingest_frame(df, fixture.unit_edges, mask_study_schema())

    def test_missing_column(self, fixture):
        with pytest.raises(ConfigError, match="missing"):
            ingest_frame(fixture.frame.drop(columns="H"), fixture.unit_edges, mask_study_schema())

    def test_incomplete_grid(self, fixture):
        with pytest.raises(ConfigError):
            ingest_frame(fixture.frame.iloc[1:], fixture.unit_edges, mask_study_schema())

    def test_nonbinary_treatment(self, fixture):
        df = fixture.frame.copy()
        df.loc[0, "W"] = 0.5
        with pytest.raises(ConfigError):
            ingest_frame(df, fixture.unit_edges, mask_study_schema())

    def test_all_treated_period(self):
        units, periods = 4, 3
        df = pd.DataFrame([{"unit": u, "period": t, "W": float(t == 2 or (u == 1 and t == 1)),
                            "Y": float(u + t)} for u in range(1, units + 1) for t in range(1, periods + 1)])
        # unit 4 has no neighbour
        p = ingest_frame(df, [(0, 1), (1, 2)], PanelSchema())
        x = p.dataset.X[:, 0].reshape(units, periods)
        assert np.array_equal(x[:3, 1], [1.0, 1.0, 1.0]) and x[3, 1] == 0.0
        # period 1: only unit 1 treated; unit 2 has neighbours 1 and 3
        assert x[1, 0] == 0.5 and x[0, 0] == 0.0
        assert np.array_equal(p.dataset.O[:, 0], p.dataset.W * p.dataset.X[:, 0])

    def test_network_is_repeated_per_period(self):
        net = expand_network([(0, 1)], 3, 2)
        assert sorted(map(tuple, net.edges())) == [(0, 2), (1, 3), (2, 0), (3, 1)]
        assert expand_network([], 2, 2).n_edges == 0


class TestObservational:
    def test_mask_graph_selection(self):
        g = mask_study_graph()
        exposure = {"X", "W", "O"}
        assert is_valid_adjustment(g, exposure, "Y", {"D", "H", "M", "P", "J"})
        assert not is_valid_adjustment(g, exposure, "Y", {"D", "H", "M", "J"})

    def test_full_estimate_recovers_truth(self, panel, fixture):
        reports = run_observational(panel, mask_study_graph(), adjustment=("D", "H", "M", "P", "J"))
        full = reports["full"]
        se = np.sqrt(full.sigma2_hat / full.n_units)
        assert abs(full.tau_hat - fixture.true_tau) <= 3 * se
        assert full.diagnostics["rows_dropped"] == 104

    def test_naive_is_separated_from_full(self, panel):
        reports = run_observational(panel, mask_study_graph(), adjustment=("D", "H", "M", "P", "J"))
        naive, full = reports["naive"].ci, reports["full"].ci
        assert naive[0] > full[1] or naive[1] < full[0]

    def test_auto_selection_uses_smallest_valid_set(self, panel):
        reports = run_observational(panel, mask_study_graph(), variants=("full",))
        assert reports["full"].adjustment_set == ["D", "H", "J", "P"]

    def test_equal_policies_give_zero(self, panel):
        reports = run_observational(panel, mask_study_graph(), pi=0.4, eta=0.4)
        assert all(r.tau_hat == 0.0 for r in reports.values())

    def test_unobserved_confounders(self, panel):
        with pytest.raises(IdentifiabilityError):
            run_observational(panel, mask_study_graph(), adjustment=("D", "M"))

    def test_table(self, panel):
        table = observational_table(run_observational(panel, mask_study_graph()))
        assert list(table["variant"]) == ["naive", "confounding", "interference", "full"]
        assert np.all(table["ci_lo"] <= table["tau_hat"]) and np.all(table["n"] == 520)
