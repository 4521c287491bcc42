"""Numerical ground truth for moment formulas.

Deterministic sphere quadrature for n in {2, 3} (periodic trapezoid on
the circle; Gauss-Legendre in the polar cosine times trapezoid in
azimuth on the 2-sphere) and seeded Monte Carlo for any n, plus exact
rejection samplers for the vMF and peanut distributions.

Monte Carlo uses the counter-based Philox generator, with the sample
index space split into fixed blocks whose seeds are spawned from a
single ``numpy.random.SeedSequence``; results therefore depend only on
(generator, seed), never on how work would be partitioned.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._linalg import jacobi_eigh
from .distributions import (
    SphericalDistribution,
    density_many,
    sphere_surface_area,
    validate as _validate_dist,
)
from .errors import DomainError, UnsupportedError, ValidationError
from .reports import MomentReport

__all__ = [
    "GENERATOR",
    "BLOCK_SIZE",
    "QuadratureSpec",
    "McSpec",
    "SampleBatch",
    "quad_moments",
    "mc_moments",
    "quad_raw_moment",
    "mc_raw_moment",
    "quad_normalization",
    "mc_normalization",
    "sample_vmf",
    "sample_peanut",
    "uniform_sphere",
]

GENERATOR = "philox4x64(seedsequence-spawned blocks)"
BLOCK_SIZE = 1 << 16

DOUBLING_TOL = 1e-10


def _is_power_of_two(m):
    return m > 0 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class QuadratureSpec:
    """Deterministic quadrature rule selector.

    ``resolution`` is the number of points per dimension and must be a
    power of two >= 16 (the periodic trapezoid rule doubles cleanly and
    converges spectrally on those grids).
    """

    n: int
    scheme: str
    resolution: int = 256

    def __post_init__(self):
        if self.scheme not in ("circle_trapezoid", "sphere_product"):
            raise ValidationError(f"unknown quadrature scheme {self.scheme!r}")
        expected_n = 2 if self.scheme == "circle_trapezoid" else 3
        if self.n != expected_n:
            raise ValidationError(
                f"scheme {self.scheme!r} applies to n={expected_n}, got n={self.n}"
            )
        if self.resolution < 16 or not _is_power_of_two(self.resolution):
            raise ValidationError("resolution must be a power of two >= 16")

    @staticmethod
    def for_dimension(n, resolution=256):
        if n == 2:
            return QuadratureSpec(2, "circle_trapezoid", resolution)
        if n == 3:
            return QuadratureSpec(3, "sphere_product", resolution)
        raise UnsupportedError(f"quadrature supports n in {{2, 3}}, got n={n}")


@dataclass(frozen=True)
class McSpec:
    """Monte-Carlo estimator settings; the seed is mandatory."""

    n: int
    samples: int
    seed: int

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("n must be >= 2")
        if self.samples < 10_000:
            raise ValidationError("Monte Carlo needs at least 10^4 samples")
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool):
            raise ValidationError("seed must be an integer")


@lru_cache(maxsize=8)
def _circle_nodes(resolution):
    phi = np.arange(resolution) * (2.0 * math.pi / resolution)
    points = np.column_stack([np.cos(phi), np.sin(phi)])
    weights = np.full(resolution, 2.0 * math.pi / resolution)
    return points, weights


@lru_cache(maxsize=8)
def _sphere_nodes(resolution):
    # cos(polar) at Gauss-Legendre nodes makes degree<2*resolution
    # polynomial integrands (e.g. the peanut moments) exact
    t, wt = np.polynomial.legendre.leggauss(resolution)
    phi = np.arange(resolution) * (2.0 * math.pi / resolution)
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    x = np.outer(s, np.cos(phi)).ravel()
    y = np.outer(s, np.sin(phi)).ravel()
    z = np.repeat(t, resolution)
    points = np.column_stack([x, y, z])
    weights = np.repeat(wt, resolution) * (2.0 * math.pi / resolution)
    return points, weights


def _nodes(spec):
    if spec.scheme == "circle_trapezoid":
        return _circle_nodes(spec.resolution)
    return _sphere_nodes(spec.resolution)


def _raw_from_nodes(dist, points, weights, orders):
    wq = weights * density_many(dist, points)
    out = {}
    for order in orders:
        if order == 0:
            out[0] = float(wq.sum())
        elif order == 1:
            out[1] = wq @ points
        elif order == 2:
            out[2] = np.einsum("m,mi,mj->ij", wq, points, points)
        elif order == 3:
            out[3] = np.einsum("m,mi,mj,mk->ijk", wq, points, points, points)
        else:
            raise DomainError(f"unsupported moment order {order}")
    return out


def _check_spec_matches(dist, spec):
    if spec.n != dist.n:
        raise ValidationError(
            f"spec dimension {spec.n} does not match distribution dimension {dist.n}"
        )


def quad_moments(dist, spec=None, *, resolution=256, check=True):
    """Mean, raw second moment and covariance by deterministic quadrature.

    With ``check=True`` the rule is re-evaluated at double resolution and
    a warning is attached to the report when the two disagree by more
    than ``DOUBLING_TOL``.
    """
    if spec is None:
        spec = QuadratureSpec.for_dimension(dist.n, resolution)
    _check_spec_matches(dist, spec)
    points, weights = _nodes(spec)
    raw = _raw_from_nodes(dist, points, weights, (0, 1, 2))
    warnings = []
    if check:
        fine = QuadratureSpec(spec.n, spec.scheme, 2 * spec.resolution)
        raw_fine = _raw_from_nodes(dist, *_nodes(fine), (1, 2))
        dev = max(
            np.max(np.abs(raw[1] - raw_fine[1])),
            np.max(np.abs(raw[2] - raw_fine[2])),
        )
        if dev >= DOUBLING_TOL:
            warnings.append(
                f"doubling resolution {spec.resolution}->{2 * spec.resolution} "
                f"changed results by {dev:.3e}"
            )
    mean = raw[1]
    second = raw[2]
    return MomentReport(
        mean,
        second,
        second - np.outer(mean, mean),
        "oracle",
        provenance={
            "method": spec.scheme,
            "resolution": spec.resolution,
            "mass": raw[0],
        },
        warnings=warnings,
    )


def quad_raw_moment(dist, spec, order):
    """Raw moment tensor of the given order by deterministic quadrature."""
    _check_spec_matches(dist, spec)
    points, weights = _nodes(spec)
    return _raw_from_nodes(dist, points, weights, (order,))[order]


def quad_normalization(dist, spec=None, *, resolution=256):
    """Integral of the density over the sphere (should be 1)."""
    if spec is None:
        spec = QuadratureSpec.for_dimension(dist.n, resolution)
    return quad_raw_moment(dist, spec, 0)


def _block_counts(samples):
    full, rest = divmod(samples, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _uniform_blocks(n, samples, seed):
    counts = _block_counts(samples)
    for child, count in zip(np.random.SeedSequence(seed).spawn(len(counts)), counts):
        rng = np.random.Generator(np.random.Philox(child))
        z = rng.standard_normal((count, n))
        yield z / np.linalg.norm(z, axis=1, keepdims=True)


def uniform_sphere(n, count, seed):
    """Uniform points on the unit sphere (normalized standard normals)."""
    return np.concatenate(list(_uniform_blocks(n, count, seed)), axis=0)


def _mc_accumulate(dist, spec, orders):
    """Sums and sums of squares of |S^{n-1}| q(theta) theta^(x)order."""
    area = sphere_surface_area(dist.n)
    sums = {}
    sqsums = {}
    for order in orders:
        shape = (dist.n,) * order
        sums[order] = np.zeros(shape)
        sqsums[order] = np.zeros(shape)
    for block in _uniform_blocks(dist.n, spec.samples, spec.seed):
        f = area * density_many(dist, block)
        f2 = f * f
        b2 = block * block
        for order in orders:
            if order == 0:
                sums[0] += f.sum()
                sqsums[0] += f2.sum()
            elif order == 1:
                sums[1] += f @ block
                sqsums[1] += f2 @ b2
            elif order == 2:
                sums[2] += np.einsum("m,mi,mj->ij", f, block, block)
                sqsums[2] += np.einsum("m,mi,mj->ij", f2, b2, b2)
            elif order == 3:
                sums[3] += np.einsum("m,mi,mj,mk->ijk", f, block, block, block)
                sqsums[3] += np.einsum("m,mi,mj,mk->ijk", f2, b2, b2, b2)
            else:
                raise DomainError(f"unsupported moment order {order}")
    result = {}
    m = spec.samples
    for order in orders:
        est = sums[order] / m
        sample_var = np.clip(sqsums[order] - sums[order] ** 2 / m, 0.0, None) / (m - 1)
        result[order] = (est, np.sqrt(sample_var / m))
    return result


def mc_moments(dist, spec):
    """Moment report with per-entry standard errors, by seeded Monte Carlo.

    Uniform-sphere importance-free estimator: averages of
    |S^{n-1}| q(theta), |S^{n-1}| q(theta) theta and
    |S^{n-1}| q(theta) theta theta^T.  Deterministic given the seed.
    """
    _check_spec_matches(dist, spec)
    acc = _mc_accumulate(dist, spec, (0, 1, 2))
    mass, mass_se = acc[0]
    mean, mean_se = acc[1]
    second, second_se = acc[2]
    cov = second - np.outer(mean, mean)
    cov_se = np.sqrt(
        second_se**2
        + np.outer(mean, mean_se) ** 2
        + np.outer(mean_se, mean) ** 2
    )
    return MomentReport(
        mean,
        second,
        cov,
        "oracle",
        provenance={
            "method": "mc",
            "samples": spec.samples,
            "seed": spec.seed,
            "generator": GENERATOR,
            "mass": float(mass),
            "mass_se": float(mass_se),
        },
        mean_se=mean_se,
        second_moment_se=second_se,
        covariance_se=cov_se,
    )


def mc_raw_moment(dist, spec, order):
    """(estimate, standard_error) for a raw moment tensor via Monte Carlo."""
    _check_spec_matches(dist, spec)
    est, se = _mc_accumulate(dist, spec, (order,))[order]
    return est, se


def mc_normalization(dist, spec):
    """(integral estimate, standard error) of the density over the sphere."""
    est, se = mc_raw_moment(dist, spec, 0)
    return float(est), float(se)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Sampler output: unit vectors plus acceptance-rate bookkeeping."""

    points: np.ndarray
    acceptance_rate: float
    seed: int
    generator: str = "philox4x64"


def _tangent_directions(rng, u, count):
    """Uniform unit vectors orthogonal to u."""
    n = u.size
    v = np.empty((count, n))
    need = np.arange(count)
    while need.size:
        z = rng.standard_normal((need.size, n))
        z -= np.outer(z @ u, u)
        norms = np.linalg.norm(z, axis=1)
        ok = norms > 1e-12
        v[need[ok]] = z[ok] / norms[ok, None]
        need = need[~ok]
    return v


def sample_vmf(k, u, count, seed):
    """Exact vMF sampler (Ulrich/Wood rejection scheme for the cosine).

    The empirical mean converges to the closed-form expectation at the
    Monte-Carlo rate; deterministic for a given seed.
    """
    u = np.asarray(u, dtype=float)
    k = float(k)
    if k < 0.0 or not math.isfinite(k):
        raise DomainError("concentration must be finite and >= 0")
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValidationError("mean direction must be a unit vector")
    n = u.size
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    if k == 0.0:
        z = rng.standard_normal((count, n))
        points = z / np.linalg.norm(z, axis=1, keepdims=True)
        return SampleBatch(points, 1.0, seed)

    d = n - 1
    b = d / (math.sqrt(4.0 * k * k + d * d) + 2.0 * k)
    x0 = (1.0 - b) / (1.0 + b)
    c = k * x0 + d * math.log(1.0 - x0 * x0)

    cosines = np.empty(count)
    got = 0
    proposed = 0
    while got < count:
        m = max(count - got, 1024)
        z = rng.beta(0.5 * d, 0.5 * d, size=m)
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        accept = k * w + d * np.log1p(-x0 * w) - c >= np.log(rng.random(m))
        w = w[accept]
        take = min(w.size, count - got)
        cosines[got : got + take] = w[:take]
        got += take
        proposed += m
    tangents = _tangent_directions(rng, u, count)
    sines = np.sqrt(np.clip(1.0 - cosines * cosines, 0.0, None))
    points = cosines[:, None] * u + sines[:, None] * tangents
    return SampleBatch(points, count / proposed, seed)


def sample_peanut(A, count, seed):
    """Exact peanut sampler: rejection against the uniform sphere.

    The envelope constant n lambda_max / tr(A) bounds the density ratio,
    so proposals are accepted with probability theta^T A theta / lambda_max.
    """
    dist = SphericalDistribution("peanut", len(np.atleast_2d(A)), A=A)
    violations = _validate_dist(dist)
    if violations:
        raise ValidationError(violations)
    A = dist.A
    n = dist.n
    sym = 0.5 * (A + A.T)
    lam_max = float(jacobi_eigh(sym)[0].max())
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    points = np.empty((count, n))
    got = 0
    proposed = 0
    while got < count:
        m = max(count - got, 1024)
        z = rng.standard_normal((m, n))
        theta = z / np.linalg.norm(z, axis=1, keepdims=True)
        ratio = np.einsum("mi,ij,mj->m", theta, A, theta) / lam_max
        theta = theta[rng.random(m) <= ratio]
        take = min(len(theta), count - got)
        points[got : got + take] = theta[:take]
        got += take
        proposed += m
    return SampleBatch(points, count / proposed, seed)
