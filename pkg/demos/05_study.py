# A small replication study: bias, variance rate and coverage.
import numpy as np
from netfx.study import preset, run_study

cfg = preset("er-10/N", sizes=(300, 600, 1200), nrep_graph=5, nrep_data=20)
m = run_study(cfg)

print("bias (rows N, columns", m.variants, ")")
print(np.round(m.bias, 4))
print("log-variance slope, full:", round(m.variance_slope("full"), 3))   # about -1
print("coverage, full:", np.round(m.coverage_by_size("full"), 3))
print("scaled RMSE of the variance estimator:", np.round(m.variance_estimator_check("full"), 3))

res = m.normality("full", size_index=-1)
print("normality p-value KS distance:", round(res.ks_distance, 3), "within band:", res.within_band)

m.write("study-demo-output")
