"""Parameter containers, validation and density evaluation for the five
spherical distribution families (vMF, bimodal vMF, peanut, ODF, Bingham).

Densities of the exponential families are evaluated in log space so that
concentrations k and inverse time scales 1/(4*delta) up to 1e4 do not
overflow.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from ._linalg import jacobi_eigh
from .errors import DomainError, ValidationError

__all__ = [
    "KINDS",
    "SphericalDistribution",
    "vmf",
    "bimodal_vmf",
    "peanut",
    "odf",
    "bingham",
    "validate",
    "density",
    "density_many",
    "log_density",
    "log_density_many",
    "sphere_surface_area",
    "density_is_normalized",
    "distribution_from_json",
    "distribution_to_json",
]

KINDS = ("vmf", "bimodal_vmf", "peanut", "odf", "bingham")

UNIT_NORM_TOL = 1e-12


def sphere_surface_area(n):
    """Surface area of the unit sphere in R^n, i.e. 2 pi^(n/2) / Gamma(n/2)."""
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n}")
    n = int(n)
    return 2.0 * math.pi ** (0.5 * n) / specfun.gamma(0.5 * n)


def _readonly_array(x, dtype=float):
    arr = np.array(x, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SphericalDistribution:
    """Tagged spherical-distribution family.

    ``u`` (unit mean direction) and ``k`` (concentration >= 0) apply to
    vmf/bimodal_vmf; ``A`` (anisotropy matrix with positive-definite
    symmetric part) to peanut/odf/bingham; ``delta`` (diffusion time > 0)
    to bingham only.  Instances are immutable; use :func:`validate` for a
    total check of the invariants.
    """

    kind: str
    n: int
    u: np.ndarray | None = None
    k: float | None = None
    A: np.ndarray | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.u is not None:
            object.__setattr__(self, "u", _readonly_array(self.u))
        if self.A is not None:
            object.__setattr__(self, "A", _readonly_array(self.A))
        if self.k is not None:
            object.__setattr__(self, "k", float(self.k))
        if self.delta is not None:
            object.__setattr__(self, "delta", float(self.delta))


def vmf(u, k):
    """Von Mises-Fisher distribution with mean direction u, concentration k."""
    return _checked(SphericalDistribution("vmf", len(u), u=u, k=k))


def bimodal_vmf(u, k):
    """Antipodally symmetric two-mode von Mises-Fisher mixture."""
    return _checked(SphericalDistribution("bimodal_vmf", len(u), u=u, k=k))


def peanut(A):
    """Quadratic-form density proportional to theta^T A theta."""
    A = np.asarray(A, dtype=float)
    return _checked(SphericalDistribution("peanut", len(A), A=A))


def odf(A):
    """Orientation distribution function for a 3x3 anisotropy matrix."""
    A = np.asarray(A, dtype=float)
    return _checked(SphericalDistribution("odf", len(A), A=A))


def bingham(A, delta):
    """Bingham (anisotropic Gaussian) density with diffusion time delta."""
    A = np.asarray(A, dtype=float)
    return _checked(SphericalDistribution("bingham", len(A), A=A, delta=delta))


def _checked(dist):
    violations = validate(dist)
    if violations:
        raise ValidationError(violations)
    return dist


def _expects(kind):
    has_uk = kind in ("vmf", "bimodal_vmf")
    return has_uk, not has_uk, kind == "bingham"


def validate(dist):
    """Total invariant check; returns a list of violation messages."""
    out = []
    if dist.kind not in KINDS:
        out.append(f"unknown kind {dist.kind!r}")
        return out
    if not isinstance(dist.n, (int, np.integer)) or dist.n < 2:
        out.append("n must be an integer >= 2")
        return out
    wants_uk, wants_a, wants_delta = _expects(dist.kind)

    if wants_uk:
        if dist.A is not None or dist.delta is not None:
            out.append(f"{dist.kind} takes parameters u and k only")
        if dist.u is None or dist.k is None:
            out.append(f"{dist.kind} requires u and k")
            return out
        if dist.u.shape != (dist.n,):
            out.append(f"u must have shape ({dist.n},)")
        elif not np.all(np.isfinite(dist.u)):
            out.append("u must be finite")
        elif abs(np.linalg.norm(dist.u) - 1.0) > UNIT_NORM_TOL:
            out.append("u must be a unit vector")
        if not math.isfinite(dist.k):
            out.append("k must be finite")
        elif dist.k < 0.0:
            out.append("k must be >= 0")
        return out

    if dist.u is not None or dist.k is not None:
        out.append(f"{dist.kind} takes an anisotropy matrix, not u/k")
    if wants_delta:
        if dist.delta is None:
            out.append("bingham requires delta")
        elif not math.isfinite(dist.delta) or dist.delta <= 0.0:
            out.append("delta must be finite and > 0")
    elif dist.delta is not None:
        out.append(f"{dist.kind} does not take delta")
    if dist.A is None:
        out.append(f"{dist.kind} requires an anisotropy matrix A")
        return out
    if dist.A.shape != (dist.n, dist.n):
        out.append(f"A must have shape ({dist.n}, {dist.n})")
        return out
    if not np.all(np.isfinite(dist.A)):
        out.append("A must be finite")
        return out
    sym = 0.5 * (dist.A + dist.A.T)
    eigenvalues, _ = jacobi_eigh(sym)
    if eigenvalues.min() <= 0.0:
        out.append("A not positive definite")
    if np.trace(dist.A) <= 0.0:
        out.append("A must have positive trace")
    if dist.kind == "odf" and dist.n != 3:
        out.append("odf densities are defined for n = 3 only")
    if dist.kind in ("odf", "bingham"):
        # these normalization constants assume a symmetric tensor
        scale = max(1.0, float(np.max(np.abs(dist.A))))
        if np.max(np.abs(dist.A - dist.A.T)) > 1e-10 * scale:
            out.append(f"A must be symmetric for {dist.kind}")
        det = np.linalg.det(dist.A)
        if not math.isfinite(det) or det <= 0.0:
            out.append("A not invertible")
    return out


def density_is_normalized(dist):
    """False only for Bingham outside n = 3, where no constant is known."""
    return not (dist.kind == "bingham" and dist.n != 3)


def _require_valid(dist):
    violations = validate(dist)
    if violations:
        raise ValidationError(violations)


def _vmf_log_const(n, k):
    """log of k^(n/2-1) / ((2 pi)^(n/2) I_{n/2-1}(k)); uniform limit at k=0."""
    p = 0.5 * n - 1.0
    # below 1e-300 (or where (k/2)^p underflows) the density is uniform
    # to within one part in 1e300
    if k < 1e-300 or (k < 1.0 and p * (math.log(k) - math.log(2.0)) < -690.0):
        return -math.log(sphere_surface_area(n))
    log_bessel = math.log(specfun.bessel_i(p, k).scaled_value) + k
    return p * math.log(k) - 0.5 * n * math.log(2.0 * math.pi) - log_bessel


def _as_points(dist, theta):
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 1:
        theta = theta[None, :]
    if theta.ndim != 2 or theta.shape[1] != dist.n:
        raise ValidationError(
            f"direction has shape {theta.shape}, expected (m, {dist.n})"
        )
    return theta


def _quadratic_form(M, points):
    return np.einsum("mi,ij,mj->m", points, M, points)


def log_density_many(dist, thetas):
    """Log densities at an (m, n) array of unit vectors."""
    _require_valid(dist)
    points = _as_points(dist, thetas)
    if dist.kind == "vmf":
        return _vmf_log_const(dist.n, dist.k) + dist.k * (points @ dist.u)
    if dist.kind == "bimodal_vmf":
        a = np.abs(dist.k * (points @ dist.u))
        lc = _vmf_log_const(dist.n, dist.k) - math.log(2.0)
        return lc + a + np.log1p(np.exp(-2.0 * a))
    if dist.kind == "peanut":
        return np.log(density_many(dist, points))
    qf = _quadratic_form(np.linalg.inv(dist.A), points)
    if dist.kind == "odf":
        lc = -math.log(4.0 * math.pi) - 0.5 * math.log(np.linalg.det(dist.A))
        return lc - 1.5 * np.log(qf)
    # bingham; normalization constant only known for n = 3
    arg = -qf / (4.0 * dist.delta)
    if dist.n == 3:
        lc = -0.5 * (
            math.log(np.linalg.det(dist.A))
            + 3.0 * math.log(4.0 * math.pi * dist.delta)
        )
        return lc + arg
    return arg


def density_many(dist, thetas):
    """Densities at an (m, n) array of unit vectors."""
    if dist.kind == "peanut":
        _require_valid(dist)
        points = _as_points(dist, thetas)
        c = dist.n / (sphere_surface_area(dist.n) * np.trace(dist.A))
        return c * _quadratic_form(dist.A, points)
    return np.exp(log_density_many(dist, thetas))


def density(dist, theta):
    """Density q(theta) at a single unit vector."""
    return float(density_many(dist, theta)[0])


def log_density(dist, theta):
    """Log density at a single unit vector."""
    return float(log_density_many(dist, theta)[0])


_JSON_FIELDS = ("kind", "n", "u", "k", "A", "delta")


def distribution_from_json(data):
    """Build a distribution from its JSON dict; unknown fields rejected."""
    if not isinstance(data, dict):
        raise ValidationError("distribution JSON must be an object")
    unknown = sorted(set(data) - set(_JSON_FIELDS))
    if unknown:
        raise ValidationError(f"unknown fields in distribution JSON: {unknown}")
    if "kind" not in data or "n" not in data:
        raise ValidationError("distribution JSON requires 'kind' and 'n'")
    kind = data["kind"]
    if kind not in KINDS:
        raise ValidationError(f"unknown kind {kind!r}; expected one of {KINDS}")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValidationError("'n' must be an integer")
    try:
        dist = SphericalDistribution(
            kind,
            n,
            u=data.get("u"),
            k=data.get("k"),
            A=data.get("A"),
            delta=data.get("delta"),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed distribution parameters: {exc}") from exc
    return _checked(dist)


def distribution_to_json(dist):
    """JSON dict for a distribution (inverse of distribution_from_json)."""
    out = {"kind": dist.kind, "n": int(dist.n)}
    if dist.u is not None:
        out["u"] = [float(v) for v in dist.u]
    if dist.k is not None:
        out["k"] = float(dist.k)
    if dist.A is not None:
        out["A"] = [[float(v) for v in row] for row in dist.A]
    if dist.delta is not None:
        out["delta"] = float(dist.delta)
    return out
