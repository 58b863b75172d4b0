"""Monte Carlo oracle: p^(alpha)(t, r, s) = E[p2(t^(2/alpha) S, r, s)], S ~ sigma_1^(alpha/2).

Samples come in fixed-size chunks, each drawn from its own Philox stream
spawned from the seed, so the estimate does not depend on how the chunks
are distributed over workers.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bessel_kernel import KernelParams, log_p2_fast, positive
from .errors import DomainError
from .stable import StableIndex

CHUNK = 1 << 16
REL_LIMIT = 0.2


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int
    seed: int
    status: str = "ok"

    def z_score(self, target):
        if self.std_error == 0:
            return math.inf if self.mean != target else 0.0
        return (self.mean - target) / self.std_error


def _streams(seed, n):
    count = -(-n // CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(count)
    for i, ss in enumerate(seqs):
        yield np.random.Generator(np.random.Philox(ss)), min(CHUNK, n - i * CHUNK)


def _kanter(beta, u, e):
    """sin(bU)/sin(U)^(1/b) * (sin((1-b)U)/E)^((1-b)/b)."""
    return np.sin(beta * u) / np.sin(u) ** (1.0 / beta) * (np.sin((1.0 - beta) * u) / e) ** ((1.0 - beta) / beta)


def _chunk_samples(beta, gen, m):
    u = math.pi * gen.random(m)
    # random() is in [0, 1); reject the measure-zero endpoint
    u = np.where(u > 0, u, 0.5 * math.pi)
    e = gen.standard_exponential(m)
    return _kanter(beta, u, e)


def sample_positive_stable(beta, n, seed):
    """n draws with E exp(-lam S) = exp(-lam^beta); deterministic in (n, seed)."""
    beta = beta.beta if isinstance(beta, StableIndex) else StableIndex(float(beta)).beta
    if n < 1:
        raise DomainError("n must be >= 1")
    return np.concatenate([_chunk_samples(beta, g, m) for g, m in _streams(seed, n)])


def merge_stats(a, b):
    """Combine (n, mean, M2) triples exactly (Chan et al.)."""
    na, ma, qa = a
    nb, mb, qb = b
    n = na + nb
    if n == 0:
        return 0, 0.0, 0.0
    delta = mb - ma
    mean = ma + delta * nb / n
    return n, mean, qa + qb + delta * delta * na * nb / n


def _stats(x):
    m = float(np.mean(x))
    return x.size, m, float(np.sum((x - m) ** 2))


def mc_mean(values_fn, beta, n, seed):
    """Streaming mean/variance of values_fn(S) over n stable draws."""
    acc = (0, 0.0, 0.0)
    for g, m in _streams(seed, n):
        acc = merge_stats(acc, _stats(values_fn(_chunk_samples(beta, g, m))))
    count, mean, m2 = acc
    if count < 2:
        return McEstimate(mean, 0.0, count, seed, "insufficient-precision")
    se = math.sqrt(m2 / (count - 1) / count)
    status = "ok" if mean > 0 and se <= REL_LIMIT * abs(mean) else "insufficient-precision"
    return McEstimate(mean, se, count, seed, status)


def mc_kernel(params, t, r, s, n, seed):
    params = params if isinstance(params, KernelParams) else KernelParams(*params)
    if params.alpha >= 2.0:
        raise DomainError("mc_kernel requires alpha < 2")
    positive(t=t, r=r, s=s)
    scale = t ** (2.0 / params.alpha)

    def values(smp):
        with np.errstate(under="ignore"):
            return np.exp(log_p2_fast(params.zeta, scale * smp, r, s))

    return mc_mean(values, params.beta, n, seed)


def mc_laplace(beta, lam, n, seed, t=1.0):
    """Empirical E exp(-lam tau), tau = t^(1/beta) S."""
    scale = t ** (1.0 / beta)
    return mc_mean(lambda smp: np.exp(-lam * scale * smp), beta, n, seed)
