"""Uniform 2-D sampling grids, spectra, and the forward/inverse transform pair.

Fields live on a square-spacing grid and are treated as periodic on it.  The
transform pair uses the ``exp(-2*pi*i*x.xi)`` convention and carries the
continuous-integral scaling (``spacing**2`` forward, one frequency cell
backward), so sums over grid nodes read like the corresponding integrals.
The spectrum layout is centered: the DC node sits at index ``(n1//2, n2//2)``
and frequencies run over ``[-1/(2 h), 1/(2 h))`` with step ``1/(n h)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SampledField2D",
    "Spectrum2D",
    "GridError",
    "make_frequency_grid",
    "dft_forward",
    "dft_inverse",
    "field_norm2",
    "spectrum_norm2",
    "write_sf2d",
    "read_sf2d",
]


class GridError(ValueError):
    """Rejected grid input (shape, spacing, or non-finite data)."""


def _check_shape(n1: int, n2: int) -> None:
    if n1 < 8 or n2 < 8:
        raise GridError(f"grid must be at least 8x8, got {n1}x{n2}")
    if n1 % 2 or n2 % 2:
        raise GridError(f"grid sizes must be even, got {n1}x{n2}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SampledField2D:
    """Periodized 2-D signal on a uniform grid with physical spacing.

    ``values[i, j]`` is the sample at ``x = origin + (i*spacing, j*spacing)``;
    axis 0 is the x1 direction, axis 1 the x2 direction.
    """

    values: np.ndarray
    spacing: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise GridError(f"expected a 2-D array, got shape {v.shape}")
        _check_shape(*v.shape)
        if self.spacing <= 0 or not np.isfinite(self.spacing):
            raise GridError(f"spacing must be positive, got {self.spacing}")
        if not np.isfinite(self.origin).all():
            raise GridError("origin must be finite")
        if not np.iscomplexobj(v):
            v = v.astype(np.float64, copy=True)
        else:
            v = v.astype(np.complex128, copy=True)
        if not np.isfinite(v).all():
            raise GridError("field values must be finite")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def n1(self) -> int:
        return self.values.shape[0]

    @property
    def n2(self) -> int:
        return self.values.shape[1]

    def axis_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical coordinates along each axis."""
        x1 = self.origin[0] + self.spacing * np.arange(self.n1)
        x2 = self.origin[1] + self.spacing * np.arange(self.n2)
        return x1, x2

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        x1, x2 = self.axis_coords()
        return np.meshgrid(x1, x2, indexing="ij")


def centered_coords(n: int, spacing: float) -> np.ndarray:
    """Coordinates ``(i - n//2) * spacing`` for a grid centered on node n//2."""
    return (np.arange(n) - n // 2) * spacing


def centered_field(values: np.ndarray, spacing: float) -> SampledField2D:
    """Field whose physical origin x = 0 sits at node ``(n1//2, n2//2)``."""
    n1, n2 = np.shape(values)
    origin = (-(n1 // 2) * spacing, -(n2 // 2) * spacing)
    return SampledField2D(values, spacing, origin)


@dataclass(frozen=True)
class Spectrum2D:
    """Discrete Fourier transform of a field, centered layout (DC mid-grid)."""

    values: np.ndarray
    spacing: float
    origin: tuple[float, float] = (0.0, 0.0)
    xi1: np.ndarray = field(init=False, repr=False)
    xi2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 2:
            raise GridError(f"expected a 2-D array, got shape {v.shape}")
        _check_shape(*v.shape)
        if self.spacing <= 0 or not np.isfinite(self.spacing):
            raise GridError(f"spacing must be positive, got {self.spacing}")
        if not np.isfinite(v).all():
            raise GridError("spectrum values must be finite")
        object.__setattr__(self, "values", _frozen(v.copy()))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "spacing", float(self.spacing))
        xi1, xi2 = make_frequency_grid(v.shape[0], v.shape[1], self.spacing)
        object.__setattr__(self, "xi1", _frozen(xi1))
        object.__setattr__(self, "xi2", _frozen(xi2))

    @property
    def n1(self) -> int:
        return self.values.shape[0]

    @property
    def n2(self) -> int:
        return self.values.shape[1]

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xi1, self.xi2, indexing="ij")

    @property
    def cell(self) -> float:
        """Area of one frequency cell."""
        return 1.0 / (self.n1 * self.spacing) / (self.n2 * self.spacing)


def make_frequency_grid(n1: int, n2: int, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    """Centered DFT frequencies per axis, in cycles per unit length.

    Each axis spans ``[-1/(2 spacing), 1/(2 spacing))`` with step
    ``1/(n spacing)``; DC sits at index ``n//2``.
    """
    _check_shape(n1, n2)
    if spacing <= 0:
        raise GridError(f"spacing must be positive, got {spacing}")
    xi1 = np.fft.fftshift(np.fft.fftfreq(n1, d=spacing))
    xi2 = np.fft.fftshift(np.fft.fftfreq(n2, d=spacing))
    return xi1, xi2


def _center_phase(spec_shape, spacing, origin):
    # the fft sandwich below treats node (n1//2, n2//2) as x = 0; the physical
    # coordinate of that node is origin + (n//2)*spacing per axis, and the
    # offset comes back as a pure modulation of the spectrum.
    c1 = origin[0] + (spec_shape[0] // 2) * spacing
    c2 = origin[1] + (spec_shape[1] // 2) * spacing
    xi1, xi2 = make_frequency_grid(spec_shape[0], spec_shape[1], spacing)
    return np.exp(-2j * np.pi * (c1 * xi1[:, None] + c2 * xi2[None, :]))


def dft_forward(f: SampledField2D) -> Spectrum2D:
    """Discrete approximation of ``F(xi) = sum f(x) exp(-2 pi i x.xi) h^2``."""
    h = f.spacing
    shifted = np.fft.ifftshift(np.asarray(f.values, dtype=np.complex128))
    F = np.fft.fftshift(np.fft.fft2(shifted)) * h * h
    F = F * _center_phase(f.values.shape, h, f.origin)
    return Spectrum2D(F, h, f.origin)


def dft_inverse(F: Spectrum2D) -> SampledField2D:
    """Exact inverse of :func:`dft_forward` up to floating-point round-off."""
    h = F.spacing
    V = F.values / _center_phase(F.values.shape, h, F.origin) / (h * h)
    f = np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(V)))
    return SampledField2D(f, h, F.origin)


def field_norm2(f: SampledField2D) -> float:
    """Squared L2 norm, ``sum |f|^2`` times the grid cell area."""
    return float((np.abs(f.values) ** 2).sum() * f.spacing ** 2)


def spectrum_norm2(F: Spectrum2D) -> float:
    """Squared L2 norm of the spectrum, ``sum |F|^2`` times the frequency cell."""
    return float((np.abs(F.values) ** 2).sum() * F.cell)


# --- SF2D file format -------------------------------------------------------
#
# One ASCII header line
#     SF2D n1 n2 spacing origin1 origin2 dtype\n
# (dtype "f64" or "c128") followed by the row-major little-endian payload.
# Floats are written with repr so the round-trip is bit-exact.

_DTYPES = {"f64": "<f8", "c128": "<c16"}


def write_sf2d(f: SampledField2D, path) -> None:
    dtype = "c128" if np.iscomplexobj(f.values) else "f64"
    header = (
        f"SF2D {f.n1} {f.n2} {f.spacing!r} {f.origin[0]!r} {f.origin[1]!r} {dtype}\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(f.values).astype(_DTYPES[dtype]).tobytes())


def read_sf2d(path) -> SampledField2D:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").strip()
        parts = header.split()
        if len(parts) != 7 or parts[0] != "SF2D":
            raise GridError(f"not an SF2D file: bad header {header!r}")
        n1, n2 = int(parts[1]), int(parts[2])
        spacing = float(parts[3])
        origin = (float(parts[4]), float(parts[5]))
        dtype = parts[6]
        if dtype not in _DTYPES:
            raise GridError(f"unknown SF2D dtype {dtype!r}")
        raw = fh.read()
    expected = n1 * n2 * np.dtype(_DTYPES[dtype]).itemsize
    if len(raw) != expected:
        raise GridError(f"SF2D payload has {len(raw)} bytes, expected {expected}")
    values = np.frombuffer(raw, dtype=_DTYPES[dtype]).reshape(n1, n2)
    if dtype == "f64":
        values = values.astype(np.float64)
    else:
        values = values.astype(np.complex128)
    return SampledField2D(values, spacing, origin)
