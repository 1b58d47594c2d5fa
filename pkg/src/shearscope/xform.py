"""Scale-shear coefficient volumes via frequency-domain multipliers.

For each scale ``a`` and shear ``s`` the full translation plane of
coefficients is one inverse DFT of ``F(xi) * conj(psi_ast_hat)``, so the
t-dependence is exact up to FFT round-off.  Cone and low-pass projections are
sharp characteristic multipliers in the centered spectrum layout.
"""
from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .generators import ShearletSpec, make_nu
from .grid import (
    GridError,
    SampledField2D,
    Spectrum2D,
    dft_forward,
    dft_inverse,
    make_frequency_grid,
)

__all__ = [
    "ConeSpec",
    "FieldMeta",
    "CoeffVolume",
    "shearlet_transform",
    "dual_cone_transform",
    "coefficient_energy",
    "triple_sum",
    "trapezoid_weights",
    "cone_project",
    "lowpass_project",
    "partition_project",
    "swap_axes_field",
    "default_a_grid",
    "default_s_grid",
    "write_cv1",
    "read_cv1",
]


@dataclass(frozen=True)
class ConeSpec:
    """Frequency cone: ``|xi1| >= u`` and ``|xi2| <= v |xi1|`` (horizontal),
    with the roles of the axes swapped for the vertical variant."""

    u: float = 1.0
    v: float = 1.0
    orientation: str = "horizontal"

    def __post_init__(self):
        if self.v <= 0:
            raise ValueError(f"cone slope bound v must be positive, got {self.v}")
        if self.u < 0:
            raise ValueError(f"cone cutoff u must be >= 0, got {self.u}")
        if self.orientation not in ("horizontal", "vertical"):
            raise ValueError(f"unknown cone orientation {self.orientation!r}")

    def contains(self, xi1, xi2):
        """Closed membership test (boundary nodes belong to the cone)."""
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        if self.orientation == "horizontal":
            return (np.abs(xi1) >= self.u) & (np.abs(xi2) <= self.v * np.abs(xi1))
        return (np.abs(xi2) >= self.u) & (np.abs(xi1) <= self.v * np.abs(xi2))


@dataclass(frozen=True)
class FieldMeta:
    """Grid metadata of an analyzed field."""

    n1: int
    n2: int
    spacing: float
    origin: tuple[float, float]

    @classmethod
    def of(cls, f: SampledField2D) -> "FieldMeta":
        return cls(f.n1, f.n2, f.spacing, f.origin)

    def frequency_mesh(self):
        xi1, xi2 = make_frequency_grid(self.n1, self.n2, self.spacing)
        return xi1[:, None], xi2[None, :]


@dataclass(frozen=True)
class CoeffVolume:
    """Shearlet coefficients on a scale x shear x translation grid.

    ``coeffs[i, j]`` is the full translation plane at scale ``a_grid[i]`` and
    shear ``s_grid[j]``; the t-nodes coincide with the analyzed field's grid.
    """

    coeffs: np.ndarray
    a_grid: np.ndarray
    s_grid: np.ndarray
    field_meta: FieldMeta

    def __post_init__(self):
        a = np.asarray(self.a_grid, dtype=float)
        s = np.asarray(self.s_grid, dtype=float)
        if a.ndim != 1 or np.any(a <= 0) or np.any(np.diff(a) <= 0):
            raise ValueError("a_grid must be strictly increasing and positive")
        if s.ndim != 1 or not np.allclose(s + s[::-1], 0.0, atol=1e-12):
            raise ValueError("s_grid must be symmetric about 0")
        c = np.asarray(self.coeffs)
        if c.shape != (len(a), len(s), self.field_meta.n1, self.field_meta.n2):
            raise ValueError(f"coeffs shape {c.shape} does not match grids")
        if not np.isfinite(c).all():
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "a_grid", a)
        object.__setattr__(self, "s_grid", s)

    def plane(self, i: int, j: int) -> np.ndarray:
        return self.coeffs[i, j]

    def at(self, i: int, j: int, t_index: tuple[int, int]) -> complex:
        return complex(self.coeffs[i, j, t_index[0], t_index[1]])


def default_a_grid(spacing: float, gamma: float = 1.0, per_octave: int = 8,
                   a_min: float | None = None) -> np.ndarray:
    """Log-spaced scales from ``a_min`` (default ``4 spacing^2``) up to ``gamma``."""
    if a_min is None:
        a_min = 4.0 * spacing * spacing
    if not (0 < a_min < gamma):
        raise ValueError(f"need 0 < a_min < gamma, got a_min={a_min}, gamma={gamma}")
    octaves = np.log2(gamma / a_min)
    npts = max(2, int(np.ceil(octaves * per_octave)) + 1)
    return gamma * 2.0 ** (np.linspace(-octaves, 0.0, npts))


def default_s_grid(xi: float = 2.0, step: float = 0.125) -> np.ndarray:
    """Uniform shears covering ``[-xi, xi]`` symmetrically."""
    if xi <= 0 or step <= 0:
        raise ValueError("xi and step must be positive")
    k = int(round(xi / step))
    return step * np.arange(-k, k + 1)


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    """Trapezoid quadrature weights for a (possibly nonuniform) 1-D grid."""
    g = np.asarray(grid, dtype=float)
    if g.size == 1:
        return np.ones(1)
    w = np.empty_like(g)
    w[1:-1] = (g[2:] - g[:-2]) / 2.0
    w[0] = (g[1] - g[0]) / 2.0
    w[-1] = (g[-1] - g[-2]) / 2.0
    return w


def _batch_inverse(values: np.ndarray, meta: FieldMeta) -> np.ndarray:
    """Inverse transform of a stack of spectra, matching :func:`dft_inverse`."""
    h = meta.spacing
    c1 = meta.origin[0] + (meta.n1 // 2) * h
    c2 = meta.origin[1] + (meta.n2 // 2) * h
    xi1, xi2 = make_frequency_grid(meta.n1, meta.n2, h)
    phase = np.exp(-2j * np.pi * (c1 * xi1[:, None] + c2 * xi2[None, :]))
    v = values / phase / (h * h)
    out = np.fft.ifft2(np.fft.ifftshift(v, axes=(-2, -1)), axes=(-2, -1))
    return np.fft.fftshift(out, axes=(-2, -1))


def _multiplier_stack(spec, F, a, s_grid, conjugate=True):
    """conj(psi_hat(a xi1, sqrt(a)(xi2 - s xi1))) * a^{3/4} * F for all shears."""
    xi1, xi2 = make_frequency_grid(F.n1, F.n2, F.spacing)
    XI1 = xi1[None, :, None]  # (1, n1, 1)
    XI2 = xi2[None, None, :]  # (1, 1, n2)
    s = np.asarray(s_grid, dtype=float)[:, None, None]
    P = spec.psi_hat(a * XI1, np.sqrt(a) * (XI2 - s * XI1))
    if conjugate:
        P = np.conj(P)
    return a ** 0.75 * P * F.values[None, :, :]


def _resolution_warning(a_grid, spacing):
    a_min = float(np.min(a_grid))
    if np.sqrt(a_min) < 2.0 * spacing:
        warnings.warn(
            f"smallest scale a={a_min:g} is under-resolved on spacing {spacing:g} "
            f"(sqrt(a) < 2*spacing); coefficients at the finest scales are "
            f"band-limited by the grid",
            RuntimeWarning,
            stacklevel=3,
        )


def shearlet_transform(
    f: SampledField2D,
    spec: ShearletSpec,
    a_grid: np.ndarray | None = None,
    s_grid: np.ndarray | None = None,
    *,
    threads: int | None = None,
) -> CoeffVolume:
    """Coefficients ``<f, psi_ast>`` for every (a, s) pair and all t at once.

    Each (a, s) plane is the inverse DFT of
    ``F(xi) conj(psi_hat(a xi1, sqrt(a)(xi2 - s xi1))) a^(3/4)``.
    """
    if a_grid is None:
        a_grid = default_a_grid(f.spacing)
    if s_grid is None:
        s_grid = default_s_grid()
    a_grid = np.asarray(a_grid, dtype=float)
    s_grid = np.asarray(s_grid, dtype=float)
    if a_grid.size == 0 or s_grid.size == 0:
        raise ValueError("a_grid and s_grid must be non-empty")
    _resolution_warning(a_grid, f.spacing)

    meta = FieldMeta.of(f)
    F = dft_forward(f)
    out = np.empty((len(a_grid), len(s_grid), f.n1, f.n2), dtype=np.complex128)

    def run(i: int) -> None:
        G = _multiplier_stack(spec, F, float(a_grid[i]), s_grid)
        out[i] = _batch_inverse(G, meta)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            list(pool.map(run, range(len(a_grid))))
    else:
        for i in range(len(a_grid)):
            run(i)
    return CoeffVolume(out, a_grid, s_grid, meta)


def dual_cone_transform(
    f: SampledField2D,
    spec: ShearletSpec,
    a_grid: np.ndarray | None = None,
    s_grid: np.ndarray | None = None,
    *,
    threads: int | None = None,
) -> CoeffVolume:
    """Vertical-cone chart: every system element is the coordinate swap of the
    corresponding horizontal element.

    Equivalently the transposed field is analyzed with the original generator
    and the translation axes are swapped back, which keeps the elements'
    frequency support inside the vertical cone (applying the unswapped
    operators to a swapped generator would not).  The shear parameter reads
    as a reciprocal slope: the chart at p responds to directions of slope
    1/p.
    """
    vol = shearlet_transform(swap_axes_field(f), spec, a_grid, s_grid, threads=threads)
    coeffs = np.ascontiguousarray(np.swapaxes(vol.coeffs, -2, -1))
    return CoeffVolume(coeffs, vol.a_grid, vol.s_grid, FieldMeta.of(f))


def coefficient_energy(
    f: SampledField2D,
    spec: ShearletSpec,
    a_grid: np.ndarray,
    s_grid: np.ndarray,
    *,
    threads: int | None = None,
) -> np.ndarray:
    """Translation-summed energies ``E[i, j] = sum_t |SH(a_i, s_j, t)|^2 dt``.

    Planes are materialized one scale at a time, so wide grids that would not
    fit in memory as a full volume can still be summed.
    """
    a_grid = np.asarray(a_grid, dtype=float)
    s_grid = np.asarray(s_grid, dtype=float)
    _resolution_warning(a_grid, f.spacing)
    meta = FieldMeta.of(f)
    F = dft_forward(f)
    E = np.empty((len(a_grid), len(s_grid)))
    cell = f.spacing ** 2

    def run(i: int) -> None:
        G = _multiplier_stack(spec, F, float(a_grid[i]), s_grid)
        planes = _batch_inverse(G, meta)
        E[i] = (np.abs(planes) ** 2).sum(axis=(-2, -1)) * cell

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            list(pool.map(run, range(len(a_grid))))
    else:
        for i in range(len(a_grid)):
            run(i)
    return E


def volume_energy(vol: CoeffVolume) -> np.ndarray:
    """Energies ``sum_t |coeffs|^2 dt`` per (scale, shear)."""
    cell = vol.field_meta.spacing ** 2
    return (np.abs(vol.coeffs) ** 2).sum(axis=(-2, -1)) * cell


def triple_sum(energies: np.ndarray, a_grid, s_grid) -> float:
    """Discrete ``sum |SH|^2 a^-3 da ds dt`` from translation-summed energies."""
    a = np.asarray(a_grid, dtype=float)
    wa = trapezoid_weights(a) * a ** -3.0
    ws = trapezoid_weights(np.asarray(s_grid, dtype=float))
    return float(np.einsum("i,j,ij->", wa, ws, energies))


def _project(f: SampledField2D, mask: np.ndarray) -> SampledField2D:
    F = dft_forward(f)
    g = dft_inverse(Spectrum2D(F.values * mask, F.spacing, F.origin))
    if not np.iscomplexobj(f.values):
        return SampledField2D(g.values.real, g.spacing, g.origin)
    return g


def cone_project(f: SampledField2D, cone: ConeSpec) -> SampledField2D:
    """Sharp orthogonal projection onto the cone (closed membership)."""
    xi1, xi2 = make_frequency_grid(f.n1, f.n2, f.spacing)
    mask = cone.contains(xi1[:, None], xi2[None, :])
    return _project(f, mask)


def lowpass_project(f: SampledField2D, half_side: float = 1.0) -> SampledField2D:
    """Sharp projection onto the centered frequency square (closed)."""
    xi1, xi2 = make_frequency_grid(f.n1, f.n2, f.spacing)
    mask = (np.abs(xi1)[:, None] <= half_side) & (np.abs(xi2)[None, :] <= half_side)
    return _project(f, mask)


def partition_masks(n1: int, n2: int, spacing: float):
    """Disjoint low-pass / horizontal / vertical masks covering the grid.

    Tie-breaks: the square boundary belongs to the low-pass region, and the
    diagonals ``|xi2| = |xi1|`` outside the square belong to the horizontal
    cone.  Uses the standardized split u = v = 1 with square [-1, 1]^2.
    """
    xi1, xi2 = make_frequency_grid(n1, n2, spacing)
    A1 = np.abs(xi1)[:, None] + np.zeros((1, n2))
    A2 = np.zeros((n1, 1)) + np.abs(xi2)[None, :]
    square = (A1 <= 1.0) & (A2 <= 1.0)
    horiz = ~square & (A2 <= A1)
    vert = ~square & ~horiz
    return square, horiz, vert


def partition_project(f: SampledField2D):
    """Exact three-way split ``f = f_D + f_C + f_Cnu`` (disjoint sharp masks)."""
    square, horiz, vert = partition_masks(f.n1, f.n2, f.spacing)
    return _project(f, square), _project(f, horiz), _project(f, vert)


def swap_axes_field(f: SampledField2D) -> SampledField2D:
    """The field with x1 and x2 interchanged."""
    return SampledField2D(f.values.T.copy(), f.spacing, (f.origin[1], f.origin[0]))


# --- CV1 file format ---------------------------------------------------------
#
# One JSON header line (grids and field metadata) followed by the complex128
# little-endian payload in (scale, shear, t-row-major) index order.


def write_cv1(vol: CoeffVolume, path) -> None:
    header = {
        "magic": "CV1",
        "a_grid": [repr(float(a)) for a in vol.a_grid],
        "s_grid": [repr(float(s)) for s in vol.s_grid],
        "field": {
            "n1": vol.field_meta.n1,
            "n2": vol.field_meta.n2,
            "spacing": repr(vol.field_meta.spacing),
            "origin": [repr(vol.field_meta.origin[0]), repr(vol.field_meta.origin[1])],
        },
        "dtype": "c128",
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("ascii"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(vol.coeffs).astype("<c16").tobytes())


def read_cv1(path) -> CoeffVolume:
    with open(path, "rb") as fh:
        line = fh.readline().decode("ascii", errors="replace")
        try:
            header = json.loads(line)
        except json.JSONDecodeError as exc:
            raise GridError(f"not a CV1 file: bad header ({exc})") from None
        if header.get("magic") != "CV1" or header.get("dtype") != "c128":
            raise GridError("not a CV1 file: wrong magic or dtype")
        a_grid = np.array([float(x) for x in header["a_grid"]])
        s_grid = np.array([float(x) for x in header["s_grid"]])
        fm = header["field"]
        meta = FieldMeta(
            int(fm["n1"]), int(fm["n2"]), float(fm["spacing"]),
            (float(fm["origin"][0]), float(fm["origin"][1])),
        )
        raw = fh.read()
    shape = (len(a_grid), len(s_grid), meta.n1, meta.n2)
    expected = int(np.prod(shape)) * 16
    if len(raw) != expected:
        raise GridError(f"CV1 payload has {len(raw)} bytes, expected {expected}")
    coeffs = np.frombuffer(raw, dtype="<c16").reshape(shape).astype(np.complex128)
    return CoeffVolume(coeffs, a_grid, s_grid, meta)
