"""
Measure vs damping, and detection boundaries
=============================================

Coarse version of the lambda sweep and the boundary scan.  Writes CSVs and
plot scripts to ./demo_figures (run the *_plot.py files if matplotlib is
around).
"""

import os

from entdetect.experiments import ExperimentSpec, boundary_scan, emit_plot_script, sweep_lambda
from entdetect.solver import SolverConfig

out = "demo_figures"
os.makedirs(out, exist_ok=True)

spec = ExperimentSpec(p=0.5, lambda_grid=[0.05, 0.25, 0.5, 0.75, 1.0], solver=SolverConfig(max_iter=500))
rows = sweep_lambda(spec, os.path.join(out, "sweep.csv"))
for r in rows:
    print(f"delta={r['delta']:<7g} lambda={r['lambda']:.2f}  E*={r['value']:.5f}")
emit_plot_script(os.path.join(out, "sweep.csv"), "sweep")

# p = 0.1: where does each test start firing?
spec = ExperimentSpec(p=0.1, delta_grid=[0.05, 0.2], solver=SolverConfig(max_iter=3000))
for row in boundary_scan(spec, path=os.path.join(out, "boundary.csv")):
    print(row)
emit_plot_script(os.path.join(out, "boundary.csv"), "boundary")
