# How fast does the largest dependency degree grow with N?
from netfx.interference import FeatureSpec, degree_scaling_slope
from netfx.sem import ErdosRenyi, FamilyPartition

frac = FeatureSpec.parse("frac-parents")
sizes = [300, 600, 1200, 2400]

for label, gen in [("I(N,10/N)", ErdosRenyi("10/N")), ("I(N,N^-2/3)", ErdosRenyi("N^-2/3")),
                   ("family", FamilyPartition())]:
    res = degree_scaling_slope(gen, frac, sizes, reps=10, seed=0)
    print(f"{label:12s} avg max degree {res.avg_max_degree.round(1)}  slope {res.slope:.2f}")
# slopes well below 1/4 allow root-N rates; near 1 they do not
