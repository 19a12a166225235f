"""
Relative entropy of entanglement on a 16-point-per-angle net
============================================================

A maximally correlated two-qubit state, then a witness for a noisy
three-qubit state split 4 x 2.
"""

import math

import numpy as np

from entdetect import DensityMatrix, SolverConfig, complex_net, e_star_D
from entdetect.states import rho_p_lambda_delta
from entdetect.witness import extract_witness, validate_witness

net = complex_net(16, 2)
print(len(net), "net points, eps2 bound", round(net.eps2_bound, 4))

# theta = [[1/2, 0.4], [0.4, 1/2]] on span{|00>, |11>}
m = np.zeros((4, 4))
m[0, 0] = m[3, 3] = 0.5
m[0, 3] = m[3, 0] = 0.4
rho = DensityMatrix(m, (2, 2))

res = e_star_D(rho, net, SolverConfig(max_iter=2000))
kl = 0.5 * math.log(0.5 / 0.9) + 0.5 * math.log(0.5 / 0.1)
print("E*  =", res.value, " classical KL =", kl)
print("interval", res.interval, "after", res.iterations, "steps")

# objective against the 1/t bound
obj = np.array(res.trace.objective_per_step)
for t in (10, 100, 1000):
    if t < len(obj):
        print(t, obj[t] - kl, "<=", math.log(2 * len(net)) / t)

# --- witness ---
rho = rho_p_lambda_delta(0.5, 0.9, 0.01)
res = e_star_D(rho, net, SolverConfig(max_iter=1500))
w = extract_witness(rho, res)
report = validate_witness(w, 10_000, seed=1, net=net)
print("Tr rho W =", w.tr_rho_w)
print("min margin over 10^4 product states:", report.min_margin, "slack", w.slack)
print("exact min over net points on B:", report.net_min_margin)
