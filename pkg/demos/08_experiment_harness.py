# Monte Carlo accept rates with exact ground truth.
from subtest.harness import ExperimentConfig, chebyshev_bound, run_experiment, sweep, sweep_table

halves = {"p": {"kind": "disjoint-halves", "n": 100}, "q": {"kind": "disjoint-halves", "n": 100, "side": "q"}}
cfg = ExperimentConfig("l2", halves, {"epsilon": 0.19, "delta": 0.1}, trials=50, seed=8)
report = run_experiment(cfg)
print(report.to_text())

# sweep epsilon: the far pair is rejected once eps drops below the true distance 0.2
rows = sweep({"epsilon": [0.6, 0.4, 0.3, 0.19]}, ExperimentConfig("l2", halves, {"delta": 0.1}, trials=30, seed=8))
print(sweep_table(rows))

print("Chebyshev, var 1, rho 2:", chebyshev_bound(1.0, 2.0))
