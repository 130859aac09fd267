# Observational panel: units by weeks, interference through a unit adjacency.
from netfx.panel import ingest_frame, mask_study_graph, mask_study_schema, observational_table, run_observational
from netfx.panel import synthetic_panel

fx = synthetic_panel(seed=0)            # 26 units, 24 periods, known effect
print(fx.frame.head())
print("true effect:", round(fx.true_tau, 4))

schema = mask_study_schema()            # Y = G two periods ahead, J = G two periods back
panel = ingest_frame(fx.frame, fx.unit_edges, schema)
print("rows used", panel.n_rows, "dropped", panel.n_dropped)

reports = run_observational(panel, mask_study_graph())
print("adjustment set:", reports["full"].adjustment_set)
print(observational_table(reports).round(4))
