# Units interact when their features share a treated source.
import numpy as np
from netfx.interference import FeatureSpec, InteractionNetwork, compute_features, dependency_graph, max_degree

# 5->1, 2->5, 5->2, 6->5, 2->3 (0-based below)
net = InteractionNetwork.from_edges(6, [(4, 0), (1, 4), (4, 1), (5, 4), (1, 2)])

second = FeatureSpec.parse("frac-parents-of-parents")
d = dependency_graph(net, second)
print("edges:", [(i + 1, j + 1) for i, j in d.edges()])   # 1-2, 1-6, 2-6, 3-5
print("max degree:", max_degree(d))

w = np.array([1, 0, 0, 1, 0, 1.0])
print("fraction of treated parents:", compute_features(net, w, FeatureSpec.parse("frac-parents"))[:, 0])
