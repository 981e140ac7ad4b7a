"""Deterministic test-field constructors: band-limited random solenoidal
fields, compactly supported bumps, and localized vorticity blobs."""

from __future__ import annotations

import math

import numpy as np

from .grid import Grid3, ScalarField, VectorField, leray_project, rfft_wavenumbers


def smoothstep(t):
    """C^1 ramp: 0 for t <= 0, 3t^2 - 2t^3 on [0, 1], 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def radial_plateau(dist, inner: float, outer: float):
    """1 inside ``inner``, smoothstep ramp down to 0 at ``outer``."""
    if not 0.0 <= inner < outer:
        raise ValueError(f"need 0 <= inner < outer, got {inner}, {outer}")
    return 1.0 - smoothstep((dist - inner) / (outer - inner))


def random_solenoidal_field(grid: Grid3, kmax: int, seed: int, amplitude: float = 1.0) -> VectorField:
    """Divergence-free Gaussian random field with integer modes |k| <= kmax.

    Normalized so the pointwise sup of |f| equals ``amplitude``; fully
    determined by ``seed``.
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((3,) + grid.shape)
    fh = np.fft.rfftn(noise, axes=(-3, -2, -1))
    kx, ky, kz, k2 = rfft_wavenumbers(grid)
    k0 = 2.0 * math.pi / grid.box_len
    fh *= k2 <= (kmax * k0) ** 2 * (1.0 + 1e-12)
    fh[:, 0, 0, 0] = 0.0
    f = leray_project(VectorField(grid, np.fft.irfftn(fh, s=grid.shape, axes=(-3, -2, -1))))
    sup = f.magnitude().max()
    if sup == 0.0:
        raise ValueError("degenerate random field (all masked modes vanished)")
    return VectorField(grid, f.data * (amplitude / sup))


def localized_field(grid: Grid3, kmax: int, seed: int, radius: float = 0.8,
                    center: tuple[int, int, int] | None = None,
                    amplitude: float = 1.0) -> VectorField:
    """Random field cut off smoothly to compact support inside B_radius(center).

    Not solenoidal (the cutoff breaks that); intended as the dual-side test
    function for pairing bounds, which require localization.
    """
    if center is None:
        center = (grid.n // 2, grid.n // 2, grid.n // 2)
    base = random_solenoidal_field(grid, kmax, seed, amplitude=1.0)
    dist = np.sqrt(grid.distance_sq_from(center))
    window = radial_plateau(dist, 0.5 * radius, radius)
    data = base.data * window
    sup = np.sqrt(np.einsum("cijk,cijk->ijk", data, data)).max()
    if sup == 0.0:
        raise ValueError("cutoff annihilated the field")
    return VectorField(grid, data * (amplitude / sup))


def periodized_gaussian(grid: Grid3, center: tuple[int, int, int], sigma: float) -> np.ndarray:
    """Smooth periodic Gaussian bump: product of 1D image sums (|m| <= 3)."""
    if sigma < 1.5 * grid.spacing:
        raise ValueError(f"sigma {sigma} under-resolved on spacing {grid.spacing}")
    coords = grid.axis_coords()
    axes = []
    for c in center:
        d = coords - coords[int(c) % grid.n]
        acc = np.zeros_like(d)
        for m in range(-3, 4):
            acc += np.exp(-((d + m * grid.box_len) ** 2) / (2.0 * sigma * sigma))
        axes.append(acc)
    return axes[0][:, None, None] * axes[1][None, :, None] * axes[2][None, None, :]


def vorticity_blob(grid: Grid3, center: tuple[int, int, int], sigma: float,
                   axis: tuple[float, float, float] = (1.0, 0.0, 0.0),
                   amplitude: float = 1.0) -> VectorField:
    """Localized solenoidal vorticity: w = grad(a . grad chi) - a * lap chi.

    chi is a periodized Gaussian of width ``sigma``; the construction is
    divergence-free to rounding by cancellation in spectral space, and the
    axis component dominates near the core (positive out to |y| ~ sqrt(2) sigma
    transversally).
    """
    a = np.asarray(axis, dtype=np.float64)
    a /= math.sqrt(float(a @ a))
    chi = periodized_gaussian(grid, center, sigma)
    ch = np.fft.rfftn(chi)
    kx, ky, kz, k2 = rfft_wavenumbers(grid)
    adotk = a[0] * kx + a[1] * ky + a[2] * kz
    wh = np.empty((3,) + ch.shape, dtype=ch.dtype)
    wh[0] = (k2 * a[0] - adotk * kx) * ch
    wh[1] = (k2 * a[1] - adotk * ky) * ch
    wh[2] = (k2 * a[2] - adotk * kz) * ch
    w = np.fft.irfftn(wh, s=grid.shape, axes=(-3, -2, -1))
    sup = np.sqrt(np.einsum("cijk,cijk->ijk", w, w)).max()
    return VectorField(grid, w * (amplitude / sup))


def scalar_bump(grid: Grid3, center: tuple[int, int, int], inner: float, outer: float) -> ScalarField:
    """Radial plateau bump as a scalar field (1 on B_inner, 0 outside B_outer)."""
    dist = np.sqrt(grid.distance_sq_from(center))
    return ScalarField(grid, radial_plateau(dist, inner, outer))


def bump_gradient(grid: Grid3, center: tuple[int, int, int], inner: float, outer: float) -> VectorField:
    """Analytic gradient of the radial plateau bump, sampled at voxel centers.

    Sampled from the closed form (not spectrally differentiated), so the
    result is exactly supported on the shell inner <= |y - center| <= outer.
    """
    n = grid.n
    offsets = np.empty((3,) + grid.shape)
    for axisidx, c in enumerate(center):
        d = (np.arange(n) - (int(c) % n) + n // 2) % n - n // 2  # signed min-image, voxels
        shape = [1, 1, 1]
        shape[axisidx] = n
        offsets[axisidx] = np.broadcast_to((d * grid.spacing).reshape(shape), grid.shape)
    dist = np.sqrt(np.einsum("cijk,cijk->ijk", offsets, offsets))
    width = outer - inner
    t = (dist - inner) / width
    on_ramp = (t > 0.0) & (t < 1.0)
    slope = np.where(on_ramp, -6.0 * t * (1.0 - t) / width, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(dist > 0.0, offsets / dist, 0.0)
    return VectorField(grid, unit * slope)
