"""Differentiating a loss whose distribution depends on θ.

The program flips a θ-coin and pays -θ/2 on tails. Differentiating only the
deterministic parts gives the wrong answer; the translated program gives an
unbiased estimate of the true derivative, which is enough to drive SGD to the
minimum at θ = 1/2.

    python3 demos/two_branch_loss.py
"""

from adev import corpus, enumerate_expectation, mc_gradient, naive_derivative, sgd

enum = corpus.load("two_branch_enum")
reinforce = corpus.load("two_branch_reinforce")

print(f"{'θ':>5} {'L(θ)':>9} {'exact':>8} {'naive':>8} {'enum':>8} {'reinforce':>17}")
for theta in (0.1, 0.3, 0.5, 0.7, 0.9):
    exact = enumerate_expectation(enum, theta)
    naive = naive_derivative(enum, theta)
    e = mc_gradient(enum, theta, 1000)
    r = mc_gradient(reinforce, theta, 20_000, seed=1)
    print(f"{theta:5.1f} {exact.L:9.4f} {exact.dL:8.4f} {naive:8.4f} {e.mean:8.4f} "
          f"{r.mean:8.4f} ± {r.stderr:.4f}")

# the REINFORCE samples are exactly 0 at θ = 1/2 on both branches, so its
# noise dies out as SGD approaches the minimum
print("\nSGD from θ = 0.2, lr = 0.2, one derivative sample per step")
print("θ at steps 0, 2, 5, 10, 20 and 50, then the final value:")
for name, program in (("flip_enum", enum), ("flip_reinforce", reinforce)):
    trace = sgd(program, 0.2, 0.2, 100, seed=0)
    path = " ".join(f"{trace.trace[k].theta:.4f}" for k in (0, 2, 5, 10, 20, 50))
    print(f"  {name:15s} {path} -> {trace.final:.4f}")
