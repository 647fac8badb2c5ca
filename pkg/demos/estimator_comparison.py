"""Different derivative estimators for the same loss: same mean, different variance.

    python3 demos/estimator_comparison.py
"""

from adev import corpus, mc_gradient

N = 50_000

groups = [
    ("two-branch loss at θ = 0.3, derivative -0.2",
     ["two_branch_enum", "two_branch_reinforce", "reinforce_bernoulli",
      "leave_one_out_two_branch"]),
    ("the same loss shifted by 5",
     ["reinforce_shifted", "baseline_shifted"]),
    ("two coins with costs, derivative 1.6",
     ["monolithic_two_flip", "addcost_two_flip"]),
]

for title, names in groups:
    print(title)
    for name in names:
        e = corpus.get(name)
        r = mc_gradient(e.program(), e.theta, N, seed=0)
        var = r.stderr ** 2 * r.n
        print(f"  {name:26s} mean {r.mean:8.4f} ± {r.stderr:.4f}   per-sample variance {var:9.4f}")
    print()
