"""Monte Carlo gradient estimation, statistical checks, and SGD.

Sample i of a run with seed n always uses Seed.from_int(n).child(i), so a
report is a pure function of (program, θ, N, seed) no matter how the samples
are spread over threads. Means are computed with math.fsum over the samples
in index order.
"""

from __future__ import annotations

import contextvars
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .compiler import Compiled, compile_program
from .errors import AdevError, AdevRuntimeError, OracleError
from .oracles import enumerable, enumerate_expectation
from .runtime import RuntimeConfig, sample_estimator
from .seed import Seed
from .typecheck import domain

Z_THRESHOLD = 4.0
ABS_FLOOR = 1e-3
CLIP_MARGIN = 1e-6
FD_MC_STEP = 1e-2


@dataclass
class GradReport:
    program: str
    theta: float
    n: int
    mean: float
    stderr: float
    primal_mean: float
    primal_stderr: float
    oracle: float | None = None
    provenance: str = "unvalidated"
    floor: float = ABS_FLOOR
    errors: int = 0
    wall_time: float = 0.0
    seed: int = 0
    first_error: str | None = None
    samples: list | None = field(default=None, repr=False)

    @property
    def z(self) -> float | None:
        if self.oracle is None:
            return None
        diff = self.mean - self.oracle
        if self.stderr == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.stderr

    @property
    def tolerance(self) -> float:
        return max(Z_THRESHOLD * self.stderr, self.floor)

    @property
    def passed(self) -> bool | None:
        """True/False against the oracle; None when there is no oracle."""
        if self.errors:
            return False
        if self.oracle is None:
            return None
        return abs(self.mean - self.oracle) <= self.tolerance

    def to_json(self):
        return {
            "program": self.program, "theta": self.theta, "n": self.n, "mean": self.mean,
            "stderr": self.stderr, "oracle": self.oracle, "z": self.z, "pass": self.passed,
            "provenance": self.provenance, "primal_mean": self.primal_mean,
            "primal_stderr": self.primal_stderr, "errors": self.errors,
            "wall_time": self.wall_time, "seed": self.seed,
        }

    def summary(self) -> str:
        verdict = {True: "PASS", False: "FAIL", None: "UNVALIDATED"}[self.passed]
        oracle = "none" if self.oracle is None else f"{self.oracle:.6g} ({self.provenance})"
        return (f"{self.program} θ={self.theta:g} N={self.n}: mean={self.mean:.6g} "
                f"± {self.stderr:.3g}, oracle={oracle} -> {verdict}")


def mean_stderr(xs):
    n = len(xs)
    if n == 0:
        return math.nan, math.nan
    m = math.fsum(xs) / n
    if n == 1 or all(x == xs[0] for x in xs):
        return xs[0], 0.0
    var = math.fsum((x - m) ** 2 for x in xs) / (n - 1)
    return m, math.sqrt(var / n)


def _compiled(p, config=None) -> Compiled:
    if isinstance(p, Compiled):
        return p
    return compile_program(p, config=config)


def draw_samples(c: Compiled, theta: float, n: int, seed: int = 0, threads: int = 1):
    """n dual samples of the translated estimator at θ: (primals, tangents, errors)."""
    est = c.estimator(theta)
    root = Seed.from_int(seed)

    def chunk(lo, hi):
        ps, ts, errs = [], [], []
        for i in range(lo, hi):
            try:
                p, t = sample_estimator(est, root.child(i))
            except AdevRuntimeError as e:
                errs.append(str(e))
                continue
            ps.append(p)
            ts.append(t)
        return ps, ts, errs

    if threads <= 1:
        return chunk(0, n)
    bounds = [(n * k // threads, n * (k + 1) // threads) for k in range(threads)]
    with ThreadPoolExecutor(threads) as pool:
        # worker threads do not inherit context variables, so carry the config over
        futures = [pool.submit(contextvars.copy_context().run, chunk, lo, hi)
                   for lo, hi in bounds]
        parts = [f.result() for f in futures]
    ps, ts, errs = [], [], []
    for a, b, e in parts:
        ps += a
        ts += b
        errs += e
    return ps, ts, errs


def mc_gradient(p, theta: float, n: int, seed: int = 0, oracle: float | None = None,
                provenance: str = "given", floor: float = ABS_FLOOR, threads: int = 1,
                keep_samples: bool = False, config: RuntimeConfig | None = None) -> GradReport:
    """Average n independent samples of the unbiased derivative estimator at θ."""
    c = _compiled(p, config)
    t0 = time.perf_counter()
    ps, ts, errs = draw_samples(c, theta, n, seed, threads)
    mean, se = mean_stderr(ts)
    pmean, pse = mean_stderr(ps)
    return GradReport(
        program=c.name, theta=theta, n=n, mean=mean, stderr=se, primal_mean=pmean,
        primal_stderr=pse, oracle=oracle, provenance=provenance if oracle is not None
        else "unvalidated", floor=floor, errors=len(errs), seed=seed,
        wall_time=time.perf_counter() - t0, first_error=errs[0] if errs else None,
        samples=ts if keep_samples else None)


# ----------------------------------------------------------------------------
# SGD


@dataclass(frozen=True)
class SgdStep:
    step: int
    theta: float
    grad: float


@dataclass
class SgdTrace:
    program: str
    theta0: float
    lr: float
    steps: int
    seed: int
    trace: list = field(default_factory=list)
    final: float = math.nan

    def to_csv_rows(self):
        yield ("step", "theta", "grad")
        for s in self.trace:
            yield (s.step, repr(s.theta), repr(s.grad))
        yield (self.steps, repr(self.final), "")


def clip_to_domain(theta: float, base) -> float:
    lo, hi = domain(base)
    if math.isfinite(lo):
        theta = max(theta, lo + CLIP_MARGIN)
    if math.isfinite(hi):
        theta = min(theta, hi - CLIP_MARGIN)
    return theta


def sgd(p, theta0: float, lr: float, steps: int, seed: int = 0,
        config: RuntimeConfig | None = None) -> SgdTrace:
    """Minimize the expected loss with one derivative sample per step.

    θ ← clip(θ - lr·g), where g is drawn at seed child k on step k and clip
    keeps θ inside the open domain of its type with a margin of 1e-6.
    """
    c = _compiled(p, config)
    root = Seed.from_int(seed)
    out = SgdTrace(c.name, theta0, lr, steps, seed)
    theta = clip_to_domain(float(theta0), c.base)
    for k in range(steps):
        g = sample_estimator(c.estimator(theta), root.child(k))[1]
        out.trace.append(SgdStep(k, theta, g))
        theta = clip_to_domain(theta - lr * g, c.base)
    out.final = theta
    return out


# ----------------------------------------------------------------------------
# Validation against the best available oracle


def fd_of_mc(c: Compiled, theta: float, n: int, seed: int = 0, step: float = FD_MC_STEP):
    """Central difference of the primal estimator with common random numbers.

    Returns (estimate, stderr). Biased by O(step²); used only as a fallback.
    """
    lo, hi = domain(c.base)
    step = min(step, (theta - lo) / 2, (hi - theta) / 2)
    up = c.estimator(theta + step)
    down = c.estimator(theta - step)
    root = Seed.from_int(seed ^ 0x5EED)
    diffs = []
    for i in range(n):
        s = root.child(i)
        diffs.append((sample_estimator(up, s)[0] - sample_estimator(down, s)[0]) / (2 * step))
    return mean_stderr(diffs)


def find_oracle(p, theta: float, n: int = 0, seed: int = 0, manifest_entry=None):
    """(oracle value, provenance, floor): enumeration, then analytic, then FD-of-MC."""
    c = _compiled(p)
    floor = ABS_FLOOR
    try:
        if enumerable(c.program):
            return enumerate_expectation(c.program, theta).dL, "enumeration", floor
    except OracleError:
        pass
    if manifest_entry is None:
        from .corpus import lookup
        manifest_entry = lookup(c.program)
    if manifest_entry is not None and manifest_entry.dL is not None:
        return manifest_entry.derivative(theta), "analytic", manifest_entry.floor
    if n > 0:
        try:
            value, se = fd_of_mc(c, theta, n, seed)
        except AdevError:
            return None, "unvalidated", floor
        # the FD estimate has its own noise; widen the floor to cover it
        floor = max(floor, Z_THRESHOLD * math.sqrt(2) * se)
        return value, "fd-of-mc (warning: biased fallback)", floor
    return None, "unvalidated", floor


def validate(p, theta: float, n: int, seed: int = 0, threads: int = 1, manifest_entry=None,
             config: RuntimeConfig | None = None) -> GradReport:
    c = _compiled(p, config)
    oracle, provenance, floor = find_oracle(c, theta, n, seed, manifest_entry)
    report = mc_gradient(c, theta, n, seed, oracle=oracle, provenance=provenance,
                         floor=floor, threads=threads)
    report.provenance = provenance
    return report


__all__ = ["GradReport", "SgdTrace", "SgdStep", "mc_gradient", "sgd", "validate",
           "find_oracle", "fd_of_mc", "mean_stderr", "clip_to_domain", "draw_samples"]
