"""Theory checks and benchmarking around the approximation.

* projection-order probability for two vectors, with analytic bounds and a
  Monte-Carlo estimate;
* the success-probability lower bound of the approximation and an empirical
  harness to compare against it;
* the hyper-parameter magnitude ``lambda`` and the default ``m2``;
* Pearson correlation and timing tables for plot-ready output.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from functools import partial

import numpy as np

from hfm.approx import ApproxParams, approxdist, default_m2, extenddist
from hfm.errors import ConfigError, DataError
from hfm.exact import exact_all_attrs, exact_attr_distance
from hfm.model import Dataset, LabelChannel, Method
from hfm.parallel import pmap


# --- projection-order probability -------------------------------------------

@dataclass(frozen=True)
class Lemma1Case:
    r1: float
    r2: float
    phi: float
    samples: int
    estimated_p: float
    sigma: float
    closed_form: float
    lower_bound: float
    upper_bound: float
    dim: int = 2

    def to_dict(self) -> dict:
        return asdict(self)


def lemma1_bounds(r1: float, r2: float, phi: float) -> tuple[float, float]:
    ratio = r1 / r2
    return math.sin(phi) / math.pi * ratio, ratio / math.sqrt(1.0 + ratio * ratio)


def lemma1_closed_form(r1: float, r2: float, phi: float) -> float:
    """Exact ``P(|<w,v1>| >= |<w,v2>|)`` for a uniformly random direction ``w``.

    It is ``theta / pi`` with ``theta`` the angle between ``v2 - v1`` and
    ``v1 + v2``. Their dot product is ``r2^2 - r1^2`` and their cross product
    has size ``2 r1 r2 sin(phi)``, which keeps small angles accurate. When
    ``v2 = +-v1`` the projections always tie and the probability is 1.
    """
    if r1 == r2 and phi in (0.0, math.pi):
        return 1.0
    theta = math.atan2(2.0 * r1 * r2 * math.sin(phi), r2 * r2 - r1 * r1)
    return theta / math.pi


def lemma1_estimate(r1: float, r2: float, phi: float, samples: int = 100_000, seed: int = 0, dim: int = 2) -> Lemma1Case:
    if not (0 < r1 <= r2) or not math.isfinite(r2):
        raise ConfigError(f"invalid geometry: need 0 < r1 <= r2, got r1={r1}, r2={r2}")
    if not 0 <= phi <= math.pi:
        raise ConfigError(f"invalid geometry: phi={phi} outside [0, pi]")
    if samples < 10_000:
        raise ConfigError("lemma1_estimate needs at least 1e4 samples")
    if dim < 2:
        raise ConfigError("the sampling dimension must be at least 2")
    v1 = np.zeros(dim)
    v2 = np.zeros(dim)
    v1[0] = r1
    v2[0], v2[1] = r2 * math.cos(phi), r2 * math.sin(phi)
    rng = np.random.default_rng(seed)
    # isotropic directions; normalisation does not change the comparison
    w = rng.standard_normal((samples, dim))
    hits = np.count_nonzero(np.abs(w @ v1) >= np.abs(w @ v2))
    p = lemma1_closed_form(r1, r2, phi)
    lower, upper = lemma1_bounds(r1, r2, phi)
    return Lemma1Case(
        r1=float(r1), r2=float(r2), phi=float(phi), samples=int(samples),
        estimated_p=hits / samples,
        sigma=math.sqrt(p * (1.0 - p) / samples),
        closed_form=p,
        lower_bound=lower,
        upper_bound=upper,
        dim=dim,
    )


# --- success-probability bound ----------------------------------------------

def unit_ball_volume(dim: int) -> float:
    """``pi^(d/2) / Gamma(d/2 + 1)``, the volume of the unit ball in ``R^d``."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    return math.exp(0.5 * dim * math.log(math.pi) - math.lgamma(0.5 * dim + 1.0))


@dataclass(frozen=True)
class Prop1Inputs:
    n: int
    k: int
    mu: float
    alpha: float
    m1: int
    m2: int

    def __post_init__(self):
        if self.n < 1 or self.k < 0 or self.m1 < 1 or self.m2 < 1:
            raise ConfigError("n, m1, m2 must be positive and k non-negative")
        if not self.mu > 0:
            raise ConfigError("mu must be positive")
        if not self.alpha >= 1:
            raise ConfigError("alpha must be at least 1")


VARIANTS = ("statement", "proof")


def prop1_base(inputs: Prop1Inputs, variant: str = "statement") -> float:
    """The quantity raised to the power ``m1``, before clamping.

    ``statement`` uses ``(1 + n/mu)^(1/(k+1)) - alpha``; ``proof`` uses the
    pre-simplification form ``sqrt((1 + n/mu)^(2/(k+1)) + 1) - sqrt(alpha^2 + 1)``.
    """
    d = inputs.k + 1
    growth = 1.0 + inputs.n / inputs.mu
    if variant == "statement":
        spread = growth ** (1.0 / d) - inputs.alpha
    elif variant == "proof":
        spread = math.sqrt(growth ** (2.0 / d) + 1.0) - math.sqrt(inputs.alpha ** 2 + 1.0)
    else:
        raise ConfigError(f"variant must be one of {VARIANTS}")
    return math.pi * inputs.mu / (inputs.m2 * unit_ball_volume(d)) * spread


def prop1_bound(inputs: Prop1Inputs, variant: str = "statement") -> float:
    """Lower bound on the probability that the approximation is within ``alpha``
    times the exact distance. The base is clamped to [0, 1]."""
    base = min(1.0, max(0.0, prop1_base(inputs, variant)))
    return 1.0 - base ** inputs.m1


@dataclass(frozen=True)
class LambdaAdvice:
    lam: float
    suggested_m2: int
    balanced_m2: float


def lambda_advisor(n: int, k: int, m1: int, m2: int) -> LambdaAdvice:
    """``lambda = m1 * (lg m2 - lg(n) / (k+1))``; larger means likelier success."""
    if n < 1 or k < 0 or m1 < 1 or m2 < 1:
        raise ConfigError("n, m1, m2 must be positive and k non-negative")
    lam = m1 * (math.log10(m2) - math.log10(n) / (k + 1))
    return LambdaAdvice(lam=lam, suggested_m2=default_m2(n), balanced_m2=n ** (1.0 / (k + 1)))


@dataclass(frozen=True)
class Prop1Empirical:
    success_rate: float
    trials: int
    mu_estimate: float
    bound: float
    ratios: list[float]

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("ratios")
        out["worst_ratio"] = max(self.ratios)
        return out


def _two_group_cloud(n: int, dim: int, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    features = rng.random((n, dim))
    groups = rng.permutation(np.concatenate([[1, 2], rng.integers(1, 3, n - 2)]))
    # constant labels: the label coordinate carries no geometry
    return Dataset(features, groups[:, None], np.zeros(n, dtype=np.int64), None, (2,), 2)


def _prop1_trial(n, k, alpha, m1, m2, seed):
    ds = _two_group_cloud(n, k + 1, seed)
    exact_max, _, _ = exact_attr_distance(ds, 0, LabelChannel.TRUE_LABELS)
    params = ApproxParams(m1=m1, m2=m2, master_seed=seed)
    approx_max, _ = approxdist(ds, 0, LabelChannel.TRUE_LABELS, params)
    return exact_max, approx_max


def prop1_empirical(n: int, k: int, alpha: float, m1: int, m2: int, trials: int = 100, seed: int = 0, workers: int = 1) -> Prop1Empirical:
    """Success frequency of ``approx <= alpha * exact`` on uniform two-group clouds.

    Points lie in the unit cube of dimension ``k+1``. The density parameter for
    the bound is estimated as ``n * Vol(B(d))`` with ``d`` the mean exact
    distance. This is a reported comparison, not a guarantee: the bound assumes
    an idealised even spread.
    """
    if n < 4 or n > 5000:
        raise ConfigError("prop1_empirical is meant for 4 <= n <= 5000")
    if trials < 100:
        raise ConfigError("prop1_empirical needs at least 100 trials")
    if k < 0 or m1 < 1 or m2 < 1 or not alpha >= 1:
        raise ConfigError("invalid k, m1, m2 or alpha")
    seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint32).tolist()
    results = pmap(partial(_prop1_trial, n, k, alpha, m1, m2), seeds, workers)
    ratios = [a / e if e > 0 else (1.0 if a == 0 else math.inf) for e, a in results]
    successes = sum(1 for e, a in results if a <= alpha * e)
    mean_d = float(np.mean([e for e, _ in results]))
    mu = n * unit_ball_volume(k + 1) * mean_d ** (k + 1)
    bound = prop1_bound(Prop1Inputs(n, k, max(mu, 1e-300), alpha, m1, m2)) if mu > 0 else 0.0
    return Prop1Empirical(successes / trials, trials, mu, bound, ratios)


# --- correlation -------------------------------------------------------------

def pearson(xs, ys) -> float:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise DataError("pearson needs two sequences of equal length")
    if x.size < 2:
        raise DataError("pearson needs at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise DataError("zero variance: correlation undefined")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def correlation_table(records: list[dict], keys: list[str]) -> dict[str, dict[str, float | None]]:
    """Pairwise Pearson matrix over ``keys``; rows with a null in either column
    are skipped, and undefined correlations are reported as None."""
    table = {}
    for a in keys:
        table[a] = {}
        for b in keys:
            pairs = [(r[a], r[b]) for r in records if r.get(a) is not None and r.get(b) is not None]
            try:
                table[a][b] = pearson(*zip(*pairs)) if len(pairs) >= 2 else None
            except DataError:
                table[a][b] = None
    return table


# --- timing ------------------------------------------------------------------

BENCH_COLUMNS = ("dataset", "n", "method", "channel", "seconds", "d_max", "d_avg")


@dataclass(frozen=True)
class BenchRow:
    dataset: str
    n: int
    method: str
    channel: str
    seconds: float
    d_max: float
    d_avg: float


def bench(dataset: Dataset, params: ApproxParams | None = None, repeats: int = 1, name: str = "dataset", workers: int = 1) -> list[BenchRow]:
    """Wall time of the exact and approximate paths on every available channel."""
    if repeats < 1:
        raise ConfigError("repeats must be at least 1")
    if params is None:
        params = ApproxParams.auto(dataset.n)
    channels = [LabelChannel.TRUE_LABELS]
    if dataset.has_predictions:
        channels.append(LabelChannel.PREDICTIONS)
    rows = []
    for method in (Method.EXACT, Method.APPROX):
        for channel in channels:
            for _ in range(repeats):
                start = time.perf_counter()
                if method is Method.EXACT:
                    rep = exact_all_attrs(dataset, channel, workers=workers)
                else:
                    rep = extenddist(dataset, channel, params, workers=workers)
                seconds = time.perf_counter() - start
                rows.append(BenchRow(name, dataset.n, method.value, channel.value, seconds, rep.aggregate_max, rep.aggregate_avg))
    return rows
