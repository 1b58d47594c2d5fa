"""Shearlet generators as evaluable frequency-domain functions.

A generator is a function ``psi_hat(xi1, xi2)`` together with declared
analytic metadata: the number of anisotropic vanishing moments in the x1
direction and the polynomial Fourier decay orders used by the frame and
wavefront machinery.  Three families are built in:

* ``dog:<n>``     n-th x1-derivative of the Gaussian ``exp(-pi |x|^2)``,
* ``classical``   the cone-adapted Meyer-style construction,
* ``tensor:<M>``  a separable moment-bearing Gaussian tensor product.

Spatial samples are always obtained by inverse DFT of the frequency-domain
closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import SampledField2D, Spectrum2D, centered_field, dft_inverse, make_frequency_grid

__all__ = [
    "DecayOrders",
    "ShearletSpec",
    "ShearParams",
    "make_dog_generator",
    "make_tensor_generator",
    "make_classical_cone_generator",
    "make_gaussian_nonadmissible",
    "make_nu",
    "psi_ast_hat",
    "generator_from_label",
    "sample_psi_ast",
    "dog_spatial",
]

INF = float("inf")

_trapz = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class DecayOrders:
    """Polynomial Fourier decay orders (``inf`` = faster than any polynomial).

    L1: decay of psi_hat in the first variable
    L2: decay of theta_hat (the moment-stripped factor) in the second variable
    L:  decay of psi_hat in the second variable
    tau, mu: the orders entering the frame truncation bounds (second / first
        variable); for the built-in families they coincide with L and L1.
    """

    L1: float = INF
    L2: float = INF
    L: float = INF
    tau: float = INF
    mu: float = INF


@dataclass(frozen=True)
class ShearletSpec:
    """A generator: evaluable ``psi_hat`` plus declared analytic metadata.

    ``psi_hat`` must accept broadcastable arrays ``(xi1, xi2)`` and return
    complex values.  ``b_support`` optionally bounds the first coordinate
    outside of which ``psi_hat`` vanishes numerically; ``w_halfwidth(b)``
    optionally bounds the second coordinate at first coordinate ``b``.  Both
    are quadrature hints, not part of the mathematical contract.
    ``moment_axis`` is 0 for ordinary generators and 1 for coordinate-swapped
    ones, and only controls which axis the moment sanity check probes.
    """

    psi_hat: Callable[[np.ndarray, np.ndarray], np.ndarray]
    declared_moments: float
    declared_decay: DecayOrders
    label: str
    b_support: tuple[float, float] | None = None
    w_halfwidth: Callable[[np.ndarray], np.ndarray] | None = None
    moment_axis: int = 0

    def __post_init__(self):
        if self.declared_moments < 0:
            raise ValueError("declared_moments must be >= 0")
        if self.moment_axis not in (0, 1):
            raise ValueError("moment_axis must be 0 or 1")
        if self.declared_moments >= 1:
            probe = np.array([-3.0, -1.0, 0.0, 0.5, 2.0])
            zero = np.zeros_like(probe)
            args = (zero, probe) if self.moment_axis == 0 else (probe, zero)
            vals = np.asarray(self.psi_hat(*args))
            if not np.allclose(vals, 0.0, atol=1e-12):
                raise ValueError(
                    f"{self.label}: psi_hat must vanish on the moment axis"
                )

    def __call__(self, xi1, xi2):
        return self.psi_hat(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))


@dataclass(frozen=True)
class ShearParams:
    """Scale, shear, and translation of one system element."""

    a: float
    s: float
    t: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.a > 0 and np.isfinite(self.a)):
            raise ValueError(f"scale a must be positive and finite, got {self.a}")
        if not np.isfinite(self.s):
            raise ValueError(f"shear s must be finite, got {self.s}")
        if not np.isfinite(self.t).all():
            raise ValueError("translation t must be finite")


def make_dog_generator(n: int) -> ShearletSpec:
    """Derivative-of-Gaussian generator with ``n`` vanishing moments.

    ``psi = (-1)^n d^n/dx1^n exp(-pi |x|^2)``, i.e.
    ``psi_hat(xi) = (-2 pi i xi1)^n exp(-pi |xi|^2)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1; the plain Gaussian is not admissible")
    n = int(n)

    def psi_hat(xi1, xi2):
        return (-2j * np.pi * xi1) ** n * np.exp(-np.pi * (xi1 ** 2 + xi2 ** 2))

    # |psi_hat(b, .)| drops below 1e-18 * peak beyond these bounds for n <= 12
    return ShearletSpec(
        psi_hat=psi_hat,
        declared_moments=n,
        declared_decay=DecayOrders(),
        label=f"dog:{n}",
        b_support=(0.0, 4.0 + 0.55 * n),
        w_halfwidth=lambda b: np.full(np.shape(b) or (), 4.0),
    )


def make_tensor_generator(M: int) -> ShearletSpec:
    """Separable stand-in for tensor-product wavelets.

    ``psi_hat(xi) = (-2 pi i xi1)^M exp(-pi xi1^2) exp(-pi xi2^2)``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    M = int(M)

    def psi_hat(xi1, xi2):
        return (-2j * np.pi * xi1) ** M * np.exp(-np.pi * xi1 ** 2) * np.exp(-np.pi * xi2 ** 2)

    return ShearletSpec(
        psi_hat=psi_hat,
        declared_moments=M,
        declared_decay=DecayOrders(),
        label=f"tensor:{M}",
        b_support=(0.0, 4.0 + 0.55 * M),
        w_halfwidth=lambda b: np.full(np.shape(b) or (), 4.0),
    )


def make_gaussian_nonadmissible() -> ShearletSpec:
    """The plain Gaussian (zero moments); useful as a negative control."""

    def psi_hat(xi1, xi2):
        return np.exp(-np.pi * (xi1 ** 2 + xi2 ** 2)) + 0j

    return ShearletSpec(
        psi_hat=psi_hat,
        declared_moments=0,
        declared_decay=DecayOrders(),
        label="gaussian",
        b_support=(0.0, 4.0),
        w_halfwidth=lambda b: np.full(np.shape(b) or (), 4.0),
    )


def _smoothstep(t):
    """Polynomial step: 0 for t<=0, 1 for t>=1, C^3 joins in between."""
    t = np.clip(t, 0.0, 1.0)
    return t ** 4 * (35.0 - 84.0 * t + 70.0 * t ** 2 - 20.0 * t ** 3)


def meyer_scale_bump(b):
    """Meyer-style radial bump supported on 1/2 <= |b| <= 2.

    Rises as ``sin(pi/2 step(2|b|-1))`` on [1/2, 1] and falls as
    ``cos(pi/2 step(|b|-1))`` on [1, 2], so the dyadic squares
    ``bump(b)^2 + bump(2b)^2`` sum to one for |b| in [1/2, 1].
    """
    b = np.abs(np.asarray(b, dtype=float))
    out = np.zeros_like(b)
    lo = (b >= 0.5) & (b <= 1.0)
    hi = (b > 1.0) & (b <= 2.0)
    out[lo] = np.sin(np.pi / 2 * _smoothstep(2.0 * b[lo] - 1.0))
    out[hi] = np.cos(np.pi / 2 * _smoothstep(b[hi] - 1.0))
    return out


def _bump_c() -> float:
    # normalization making the angular factor unit-energy on (-1, 1)
    eta = np.linspace(-1.0, 1.0, 200001)
    with np.errstate(divide="ignore", over="ignore"):
        v = np.where(np.abs(eta) < 1.0, np.exp(-1.0 / np.maximum(1.0 - eta ** 2, 1e-300)), 0.0)
    return float(1.0 / np.sqrt(_trapz(v ** 2, eta)))


_BUMP_C = _bump_c()


def angular_bump(eta):
    """Smooth compactly supported angular factor, unit L2 norm on (-1, 1)."""
    eta = np.asarray(eta, dtype=float)
    out = np.zeros_like(eta)
    inside = np.abs(eta) < 1.0
    out[inside] = _BUMP_C * np.exp(-1.0 / (1.0 - eta[inside] ** 2))
    return out


def make_classical_cone_generator() -> ShearletSpec:
    """Cone-adapted generator ``psi_hat(xi) = bump(xi1) * angular(xi2/xi1)``.

    The radial factor is supported on ``1/2 <= |xi1| <= 2`` and the angular
    factor on ``|xi2/xi1| <= 1``, giving compact frequency support inside the
    horizontal cone; every moment integral is finite, so the declared moment
    count is infinite.
    """

    def psi_hat(xi1, xi2):
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        safe = np.where(xi1 != 0.0, xi1, 1.0)
        ratio = np.where(xi1 != 0.0, xi2 / safe, np.inf)
        return meyer_scale_bump(xi1) * angular_bump(ratio) + 0j

    return ShearletSpec(
        psi_hat=psi_hat,
        declared_moments=INF,
        declared_decay=DecayOrders(),
        label="classical",
        b_support=(0.5, 2.0),
        w_halfwidth=lambda b: np.abs(np.asarray(b, dtype=float)),
    )


def make_nu(spec: ShearletSpec) -> ShearletSpec:
    """Coordinate-swapped generator for the vertical cone."""
    inner = spec.psi_hat

    def psi_hat(xi1, xi2):
        return inner(xi2, xi1)

    if spec.label.startswith("nu(") and spec.label.endswith(")"):
        label = spec.label[3:-1]
    else:
        label = f"nu({spec.label})"
    return ShearletSpec(
        psi_hat=psi_hat,
        declared_moments=spec.declared_moments,
        declared_decay=spec.declared_decay,
        label=label,
        b_support=None,
        w_halfwidth=None,
        moment_axis=1 - spec.moment_axis,
    )


def psi_ast_hat(spec: ShearletSpec, p: ShearParams, xi1, xi2):
    """Frequency-domain system element:

    ``a^(3/4) exp(-2 pi i t.xi) psi_hat(a xi1, sqrt(a) (xi2 - s xi1))``.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    a, s = p.a, p.s
    phase = np.exp(-2j * np.pi * (p.t[0] * xi1 + p.t[1] * xi2))
    return a ** 0.75 * phase * spec.psi_hat(a * xi1, np.sqrt(a) * (xi2 - s * xi1))


def sample_psi_ast(spec: ShearletSpec, p: ShearParams, n: int, spacing: float) -> SampledField2D:
    """Spatial samples of one system element via inverse DFT of its closed form."""
    xi1, xi2 = make_frequency_grid(n, n, spacing)
    vals = psi_ast_hat(spec, p, xi1[:, None], xi2[None, :])
    template = centered_field(np.zeros((n, n)), spacing)
    return dft_inverse(Spectrum2D(vals, spacing, template.origin))


_HERMITE: dict[int, list[float]] = {0: [1.0], 1: [0.0, 2.0]}


def _hermite_coeffs(n: int) -> list[float]:
    # physicists' Hermite polynomials via H_{n} = 2x H_{n-1} - 2(n-1) H_{n-2}
    if n not in _HERMITE:
        hm1 = _hermite_coeffs(n - 1)
        hm2 = _hermite_coeffs(n - 2)
        c = [0.0] * (n + 1)
        for k, v in enumerate(hm1):
            c[k + 1] += 2.0 * v
        for k, v in enumerate(hm2):
            c[k] -= 2.0 * (n - 1) * v
        _HERMITE[n] = c
    return _HERMITE[n]


def dog_spatial(n: int, x1, x2):
    """Closed spatial form of the ``dog:n`` generator.

    ``psi(x) = pi^(n/2) H_n(sqrt(pi) x1) exp(-pi |x|^2)`` with the
    physicists' Hermite polynomial H_n.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    t = np.sqrt(np.pi) * x1
    acc = np.zeros_like(t)
    for k, c in enumerate(_hermite_coeffs(int(n))):
        if c:
            acc = acc + c * t ** k
    return np.pi ** (n / 2.0) * acc * np.exp(-np.pi * (x1 ** 2 + x2 ** 2))


def generator_from_label(label: str) -> ShearletSpec:
    """Build a generator from its label: ``dog:<n>``, ``classical``, ``tensor:<M>``."""
    label = label.strip()
    if label == "classical":
        return make_classical_cone_generator()
    if label == "gaussian":
        return make_gaussian_nonadmissible()
    for prefix, factory in (("dog:", make_dog_generator), ("tensor:", make_tensor_generator)):
        if label.startswith(prefix):
            arg = label[len(prefix):]
            try:
                value = int(arg)
            except ValueError:
                raise ValueError(f"bad generator label {label!r}: order must be an integer")
            return factory(value)
    raise ValueError(
        f"unknown generator label {label!r}; expected dog:<n>, classical, or tensor:<M>"
    )
