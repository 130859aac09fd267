# Which covariate sets identify the joint effect of (X, W, O) on Y?
from netfx.graph import Dag, d_separated, enumerate_valid_adjustment_sets, forbidden_nodes
from netfx.sem import simulation_graph

g = simulation_graph()            # generic graph of the default simulation model
print(sorted(g.edges))

exposure = {"X", "W", "O"}
print("forbidden:", sorted(forbidden_nodes(g, exposure, {"Y"})))

for z in enumerate_valid_adjustment_sets(g, exposure, "Y", ["C1", "C2", "C3"]):
    print("valid:", sorted(z))

# C2 sits between C1 and W, so conditioning on it screens W off from C1
print("W indep C1 given C2:", d_separated(g, {"W"}, {"C1"}, {"C2"}))

chain = Dag([("A", "B"), ("B", "C")])
print("A indep C given B:", d_separated(chain, {"A"}, {"C"}, {"B"}))
