"""Nearly incompressible Neo-Hookean material for silicone actuator walls.

Energy density (mm-N-MPa units):

    W = c10 * (I1bar - 3) + kappa / 2 * (J - 1)**2

with I1bar the first invariant of the isochoric right Cauchy-Green
tensor and J = det F.  The volumetric term is a penalty that enforces
near-incompressibility; by default kappa = 1000 * c10.

All tensor routines accept stacked deformation gradients of shape
(..., 3, 3) and return correspondingly stacked results.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

DEFAULT_C10 = 0.24        # MPa, cast silicone used for all actuators
DEFAULT_KAPPA_RATIO = 1000.0
MIN_KAPPA_RATIO = 100.0

# vendor datasheet values for the cast silicone; reference only, they are
# not mutually consistent with the calibrated c10 under this energy and
# must never be used as constitutive constants
SILICONE_DATASHEET = {
    "shore_hardness_a": 40.0,
    "modulus_at_100pct_mpa": 1.38,
    "tensile_strength_mpa": 4.14,
}

_EYE = np.eye(3)


class InvalidDeformation(ValueError):
    """Raised when a deformation gradient has non-positive det F."""


@dataclass(frozen=True)
class HyperelasticParams:
    """Material constants: shear-like coefficient c10 and bulk penalty kappa.

    kappa defaults to 1000 * c10.  Ratios below 100 are rejected because
    the volumetric coupling would no longer approximate incompressibility.
    """

    c10: float
    kappa: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not np.isfinite(self.c10) or self.c10 <= 0.0:
            raise ValueError(f"c10 must be positive and finite, got {self.c10}")
        if self.kappa is None:
            object.__setattr__(self, "kappa", DEFAULT_KAPPA_RATIO * self.c10)
        if not np.isfinite(self.kappa) or self.kappa <= 0.0:
            raise ValueError(f"kappa must be positive and finite, got {self.kappa}")
        if self.kappa / self.c10 < MIN_KAPPA_RATIO:
            raise ValueError(
                f"kappa/c10 = {self.kappa / self.c10:.3g} is below the "
                f"minimum ratio {MIN_KAPPA_RATIO:g}"
            )


@dataclass(frozen=True)
class DeformationState:
    """Deformation gradient plus cached invariants J and I1bar."""

    f: np.ndarray
    j: np.ndarray
    i1bar: np.ndarray

    @classmethod
    def from_gradient(cls, f):
        f = np.asarray(f, dtype=float)
        if f.shape[-2:] != (3, 3):
            raise ValueError(f"deformation gradient must be (..., 3, 3), got {f.shape}")
        j = np.linalg.det(f)
        if np.any(j <= 0.0):
            raise InvalidDeformation(f"det F must be positive, min is {np.min(j):.3g}")
        i1 = np.einsum("...ki,...ki->...", f, f)
        return cls(f=f, j=j, i1bar=j ** (-2.0 / 3.0) * i1)


def strain_energy(params, state):
    """Energy density W >= 0, zero exactly at the identity."""
    return (params.c10 * (state.i1bar - 3.0)
            + 0.5 * params.kappa * (state.j - 1.0) ** 2)


def cauchy_stress(params, state):
    """Cauchy stress, symmetric, (..., 3, 3).

    Deviatoric part 2*c10/J^(5/3) * dev(B) plus pressure kappa*(J-1)*I.
    """
    f, j = state.f, np.asarray(state.j)
    b = np.einsum("...ik,...jk->...ij", f, f)
    trb = np.einsum("...ii->...", b)
    dev_b = b - (trb / 3.0)[..., None, None] * _EYE
    sig = 2.0 * params.c10 * j[..., None, None] ** (-5.0 / 3.0) * dev_b
    sig += (params.kappa * (j - 1.0))[..., None, None] * _EYE
    return sig


def pk2_stress(params, f):
    """Second Piola-Kirchhoff stress from stacked gradients (..., 3, 3)."""
    f = np.asarray(f, dtype=float)
    j = np.linalg.det(f)
    if np.any(j <= 0.0):
        raise InvalidDeformation(f"det F must be positive, min is {np.min(j):.3g}")
    c = np.einsum("...ki,...kj->...ij", f, f)
    cinv = np.linalg.inv(c)
    i1 = np.einsum("...ii->...", c)
    jm23 = j ** (-2.0 / 3.0)
    s = 2.0 * params.c10 * jm23[..., None, None] * (
        _EYE - (i1 / 3.0)[..., None, None] * cinv)
    s += (params.kappa * (j - 1.0) * j)[..., None, None] * cinv
    return s


def pk1_stress(params, f):
    """First Piola-Kirchhoff stress P = F S."""
    return np.einsum("...ij,...jk->...ik", np.asarray(f, dtype=float),
                     pk2_stress(params, f))


def material_tangent(params, state):
    """Lagrangian elasticity tensor 2 dS/dC, shape (..., 3, 3, 3, 3).

    This is the tensor contracted against dC increments in the solver
    linearization, so it is exactly the derivative of the stress measure
    that builds the residual.  Minor symmetry holds in both index pairs.
    """
    return lagrangian_tangent(params, state.f)


def lagrangian_tangent(params, f):
    f = np.asarray(f, dtype=float)
    j = np.linalg.det(f)
    if np.any(j <= 0.0):
        raise InvalidDeformation(f"det F must be positive, min is {np.min(j):.3g}")
    c = np.einsum("...ki,...kj->...ij", f, f)
    cinv = np.linalg.inv(c)
    i1 = np.einsum("...ii->...", c)
    jm23 = (j ** (-2.0 / 3.0))[..., None, None, None, None]
    i1_ = i1[..., None, None, None, None]
    j_ = j[..., None, None, None, None]

    ct_x_ct = np.einsum("...ij,...kl->...ijkl", cinv, cinv)
    ct_o_ct = 0.5 * (np.einsum("...ik,...jl->...ijkl", cinv, cinv)
                     + np.einsum("...il,...jk->...ijkl", cinv, cinv))
    eye_x_ct = np.einsum("ij,...kl->...ijkl", _EYE, cinv)
    ct_x_eye = np.einsum("...ij,kl->...ijkl", cinv, _EYE)

    cc = (4.0 * params.c10 / 3.0) * jm23 * (
        (i1_ / 3.0) * ct_x_ct - eye_x_ct - ct_x_eye + i1_ * ct_o_ct)
    cc += params.kappa * j_ * ((2.0 * j_ - 1.0) * ct_x_ct
                               - 2.0 * (j_ - 1.0) * ct_o_ct)
    return cc


def calibrate_c10(pressures, displacements, forward_model,
                  bounds=(0.01, 2.0), xatol=2.5e-4):
    """Fit c10 to pressure-displacement observations.

    ``forward_model(c10, pressures)`` must return predicted displacements
    for the observation pressures.  The sum of squared residuals is
    minimized by bounded scalar search; the bracket is tightened below
    1e-3 MPa.  Hitting either search bound raises a warning because the
    optimum then sits outside the trusted range.
    """
    p = np.atleast_1d(np.asarray(pressures, dtype=float))
    d = np.atleast_1d(np.asarray(displacements, dtype=float))
    if p.size == 0 or d.size == 0:
        raise ValueError("calibration needs at least one observation")
    if p.shape != d.shape:
        raise ValueError(f"pressure/displacement shape mismatch: {p.shape} vs {d.shape}")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(d))):
        raise ValueError("observations must be finite")

    def sse(c10):
        r = np.asarray(forward_model(c10, p), dtype=float) - d
        return float(np.dot(r.ravel(), r.ravel()))

    res = minimize_scalar(sse, bounds=bounds, method="bounded",
                          options={"xatol": xatol})
    c10 = float(res.x)
    margin = max(4.0 * xatol, 1e-3)
    if c10 - bounds[0] < margin or bounds[1] - c10 < margin:
        warnings.warn(
            f"calibrated c10 = {c10:.4g} MPa sits at a search bound "
            f"{bounds}; widen the bounds or check the data",
            stacklevel=2,
        )
    return c10
