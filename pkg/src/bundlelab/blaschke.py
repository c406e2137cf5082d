"""Finite Blaschke products, Moebius transforms, fibers, and critical points.

A Blaschke product of order m is ``e^{i theta} * prod (z_j - z)/(1 - conj(z_j) z)``
with all zeros strictly inside the unit disk; it maps the disk onto itself
m-to-1 and has modulus one on the circle.  Fibers (all disk preimages of a
value, with multiplicity) are computed through companion-matrix roots of the
rational form plus Newton polishing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryRootWarning, DomainError, RootFindingError

__all__ = [
    "BlaschkeProduct",
    "MoebiusTransform",
    "eval_blaschke",
    "compose_blaschke",
    "moebius_inverse",
    "solve_fiber",
    "critical_points",
    "moebius",
]

_ZERO_MARGIN = 1e-12
_INTERIOR = 1.0 - 1e-9
_BOUNDARY_BAND = 1e-6
_CLUSTER_TOL = 1e-8
_POLISH_TOL = 1e-12


@dataclass(frozen=True)
class BlaschkeProduct:
    """Zero list inside the disk plus a unimodular phase factor e^{i theta}."""

    zeros: tuple = ()
    theta: float = 0.0

    def __post_init__(self):
        zs = tuple(complex(z) for z in self.zeros)
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "theta", float(self.theta) % (2.0 * np.pi))
        for z in zs:
            if abs(z) >= 1.0 - _ZERO_MARGIN:
                raise DomainError(f"Blaschke zero {z} is not strictly inside the disk")

    @property
    def order(self):
        return len(self.zeros)

    @property
    def phase(self):
        return complex(np.exp(1j * self.theta))

    def __call__(self, z):
        return eval_blaschke(self, z)

    def star(self):
        """Coefficient-conjugate product: zeros conjugated, phase reflected."""
        return BlaschkeProduct(tuple(np.conj(z) for z in self.zeros), -self.theta)

    def rational(self):
        """Numerator/denominator coefficient arrays, constant term first."""
        num = np.array([self.phase], dtype=complex)
        den = np.array([1.0 + 0.0j])
        for z in self.zeros:
            num = np.convolve(num, np.array([z, -1.0], dtype=complex))
            den = np.convolve(den, np.array([1.0, -np.conj(z)], dtype=complex))
        return num, den


class MoebiusTransform(BlaschkeProduct):
    """Order-1 Blaschke product: a disk automorphism."""

    def __init__(self, z0, theta=0.0):
        super().__init__((complex(z0),), theta)

    @property
    def z0(self):
        return self.zeros[0]


def moebius(z0, theta=0.0):
    """The automorphism e^{i theta} (z0 - z)/(1 - conj(z0) z)."""
    return MoebiusTransform(z0, theta)


def eval_blaschke(B, z):
    """Evaluate the product at one point or an array of points."""
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, B.phase, dtype=complex)
    for zj in B.zeros:
        out *= (zj - z) / (1.0 - np.conj(zj) * z)
    return out if out.shape else complex(out)


def compose_blaschke(B1, B2):
    """The Blaschke product B1 o B2, of order m1 * m2.

    Zeros are the B2-preimages of the zeros of B1 (with multiplicity); the
    phase is fixed by matching one probe evaluation rather than by symbolic
    phase algebra.
    """
    from .funcspec import BlaschkeSpec

    zeros = []
    spec2 = BlaschkeSpec(B2)
    for zj in B1.zeros:
        zeros.extend(solve_fiber(spec2, zj))
    candidate = BlaschkeProduct(tuple(zeros), 0.0)
    for probe in (0.31 + 0.17j, -0.22 + 0.41j, 0.05 - 0.53j):
        denom = eval_blaschke(candidate, probe)
        if abs(denom) > 1e-6:
            ratio = eval_blaschke(B1, eval_blaschke(B2, probe)) / denom
            return BlaschkeProduct(tuple(zeros), float(np.angle(ratio)))
    raise RootFindingError("could not fix the phase of a composed Blaschke product")


def moebius_inverse(phi):
    """The inverse automorphism, verified on 20 probe points to 1e-12."""
    if phi.order != 1:
        raise DomainError("moebius_inverse needs an order-1 Blaschke product")
    z0 = phi.zeros[0]
    w0 = phi.phase * z0  # the inverse sends phi(0) back to 0
    p = 0.3
    image = eval_blaschke(phi, p)
    ratio = p * (1.0 - np.conj(w0) * image) / (w0 - image) if abs(w0 - image) > 0 else 1.0
    psi = MoebiusTransform(w0, float(np.angle(ratio)))
    probes = 0.9 * np.exp(2j * np.pi * np.arange(20) / 20.0) * np.linspace(0.3, 1.0, 20)
    err = np.max(np.abs(eval_blaschke(psi, eval_blaschke(phi, probes)) - probes))
    if err > 1e-12:
        raise RootFindingError(f"Moebius inverse probe identity failed ({err:.2e})")
    return psi


def _poly_roots(coeffs):
    """Roots of a constant-first coefficient array, highest zeros trimmed."""
    c = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(c))
    if scale == 0.0:
        raise RootFindingError("zero polynomial has no isolated roots")
    nz = np.nonzero(np.abs(c) > 1e-300)[0]
    c = c[: nz[-1] + 1]
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(c[::-1])


def _newton_polish(coeffs, roots, tol=_POLISH_TOL, iters=50):
    """Polish roots of a constant-first polynomial; relative-residual target."""
    c = np.asarray(coeffs, dtype=complex)
    dc = c[1:] * np.arange(1, c.size)
    scale = max(np.max(np.abs(c)), 1e-300)
    out = []
    for z in np.atleast_1d(roots):
        for _ in range(iters):
            v = np.polyval(c[::-1], z)
            if abs(v) <= tol * scale:
                break
            dv = np.polyval(dc[::-1], z) if dc.size else 0.0
            if abs(dv) < 1e-300:
                break
            step = v / dv
            z = z - step
            if abs(step) < 1e-16 * (1.0 + abs(z)):
                break
        out.append(z)
    return np.array(out, dtype=complex)


def _lex_key(z, quantum=1e-9):
    """(re, im) lexicographic key, quantized so roundoff cannot flip order."""
    z = complex(z)
    return (round(z.real / quantum), round(z.imag / quantum))


def _cluster(points, tol=_CLUSTER_TOL):
    """Group points within tol (union-find); returns (centroid, size) pairs."""
    pts = list(points)
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(pts[i] - pts[j]) <= tol * max(1.0, abs(pts[i])):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(pts[i])
    return [(complex(np.mean(g)), len(g)) for g in groups.values()]


def solve_fiber(spec, omega, cluster_tol=_CLUSTER_TOL):
    """All zeros of spec(z) - omega strictly inside the disk, with multiplicity.

    Roots are companion-matrix eigenvalues of P - omega*Q, Newton polished,
    then clustered for multiplicity detection.  A root within 1e-6 of the unit
    circle triggers BoundaryRootWarning and is excluded from the interior list.
    """
    from .funcspec import to_rational

    P, Q = to_rational(spec)
    n = max(P.size, Q.size)
    R = np.zeros(n, dtype=complex)
    R[: P.size] += P
    R[: Q.size] -= omega * Q
    roots = _newton_polish(R, _poly_roots(R))
    scale = max(np.max(np.abs(R)), 1e-300)
    residuals = np.abs(np.polyval(R[::-1], roots)) if roots.size else np.zeros(0)
    # Multiple roots satisfy |R| ~ |z - z*|^mu; accept when the residual is
    # small in that weaker sense as well.
    for z, res in zip(roots, residuals):
        if res > 1e-6 * scale:
            raise RootFindingError(
                f"root polish stalled at residual {res / scale:.2e} for value {omega}"
            )
    interior = []
    for z in roots:
        r = abs(z)
        if abs(r - 1.0) < _BOUNDARY_BAND:
            warnings.warn(
                f"fiber root {z:.12g} lies within 1e-6 of the unit circle",
                BoundaryRootWarning,
                stacklevel=2,
            )
            continue
        if r < _INTERIOR:
            interior.append(z)
    out = []
    for centroid, size in _cluster(interior, cluster_tol):
        out.extend([centroid] * size)
    return sorted(out, key=_lex_key)


def critical_points(spec):
    """Disk zeros of the derivative, paired with their branch values.

    Returns a list of ``(point, value)`` with multiplicity, sorted like
    :func:`solve_fiber`.
    """
    from .funcspec import spec_eval, to_rational

    P, Q = to_rational(spec)
    dP = P[1:] * np.arange(1, P.size) if P.size > 1 else np.zeros(1, dtype=complex)
    dQ = Q[1:] * np.arange(1, Q.size) if Q.size > 1 else np.zeros(1, dtype=complex)
    N = np.polynomial.polynomial.polysub(
        np.polynomial.polynomial.polymul(dP, Q),
        np.polynomial.polynomial.polymul(P, dQ),
    )
    if np.max(np.abs(N)) == 0.0:
        return []
    roots = _newton_polish(N, _poly_roots(N))
    interior = [z for z in roots if abs(z) < _INTERIOR]
    out = []
    for centroid, size in _cluster(interior):
        out.extend([(centroid, complex(spec_eval(spec, centroid)))] * size)
    return sorted(out, key=lambda pv: _lex_key(pv[0]))
