"""Self-contained correctness checks runnable from the command line.

The quick suite covers the discrete mechanics (derivative consistency,
patch test, closed-cavity equilibrium) and the valve-loop closed form;
the full suite adds the near-incompressibility guarantee and a coarse
solve of the thick-walled cylinder against its plane-strain closed
form.  Every check returns a CheckResult instead of raising, so one
bad configuration fails the run without hiding later checks.
"""

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import config as cfgmod
from . import fea, geometry, pneumatics
from . import material as mat


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed_s: float


def _result(name, t0, passed, detail):
    return CheckResult(name=name, passed=bool(passed), detail=detail,
                       elapsed_s=time.perf_counter() - t0)


# ------------------------------------------------------- closed forms

def cylinder_pressure_kpa(inner_radius_mm, spec=None, c10_mpa=None):
    """Inflation pressure of the plane-strain incompressible cylinder.

    For an inner radius ``a`` (deformed) the exact pressure follows by
    integrating the hoop-radial stress difference across the wall with
    the incompressible map r^2 = R^2 + a^2 - A^2 at unit axial
    stretch.  Used as the independent reference for the tube solves.
    """
    spec = spec or geometry.ActuatorSpec(kind="tube")
    c10 = mat.DEFAULT_C10 if c10_mpa is None else c10_mpa
    rout = spec.width / 2.0
    rin = rout - spec.wall
    a = float(inner_radius_mm)
    if a < rin:
        raise ValueError(f"deformed inner radius {a} below reference {rin}")

    def integrand(big_r):
        r2 = big_r * big_r + a * a - rin * rin
        return 2.0 * c10 * (r2 / big_r**2 - big_r**2 / r2) * big_r / r2

    mpa = quad(integrand, rin, rout, epsabs=1e-12, epsrel=1e-12)[0]
    return mpa / fea.KPA_TO_MPA


def cylinder_inner_radius_mm(pressure_kpa, spec=None, c10_mpa=None):
    """Inverse of cylinder_pressure_kpa via bracketed root finding."""
    spec = spec or geometry.ActuatorSpec(kind="tube")
    rout = spec.width / 2.0
    rin = rout - spec.wall
    if pressure_kpa == 0.0:
        return rin
    return brentq(
        lambda a: cylinder_pressure_kpa(a, spec, c10_mpa) - pressure_kpa,
        rin + 1e-12, 4.0 * rin, xtol=1e-12)


CYLINDER_FIXED = (("end0", "z"), ("end1", "z"), ("xaxis", "y"),
                  ("yaxis", "x"))


def solve_cylinder(element_size, pressure_kpa=50.0, increments=10,
                   c10_mpa=None):
    """Plane-strain tube inflation; returns the mean inner expansion, mm."""
    spec = geometry.ActuatorSpec(kind="tube", element_size=element_size)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mesh = geometry.generate_mesh(spec)
    c10 = mat.DEFAULT_C10 if c10_mpa is None else c10_mpa
    params = mat.HyperelasticParams(c10=c10)
    case = fea.LoadCase(target_pressure_kpa=pressure_kpa,
                        increments=increments, fixed_set=None,
                        extra_fixed=CYLINDER_FIXED)
    sol = fea.solve(mesh, params, case)
    return float(fea.measure_radial_expansion(mesh, sol)[-1])


# ------------------------------------------------------------- checks

def check_gradient(cfg=None, n_states=100, seed=20260814):
    """Energy, internal force, tangent and pressure terms agree with
    central finite differences over random admissible states."""
    t0 = time.perf_counter()
    mesh = geometry.generate_mesh(
        geometry.ActuatorSpec(kind="cube", element_size=0.5))
    pm = _material(cfg)
    pre = fea._Precomputed(mesh)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pocket = geometry.generate_mesh(
            geometry.ActuatorSpec(kind="pocket", element_size=2.5))
    fd = fea._FaceData(pocket, "cavity")
    rng = np.random.default_rng(seed)
    h = 1e-5
    worst_force = worst_tangent = worst_press = 0.0
    for k in range(n_states):
        if k % 3 < 2:
            u = 0.02 * rng.standard_normal((mesh.n_nodes, 3))
            v = rng.standard_normal((mesh.n_nodes, 3))
            v /= np.linalg.norm(v)
            ep = fea.total_strain_energy(mesh, pm, u + h * v, pre)
            em = fea.total_strain_energy(mesh, pm, u - h * v, pre)
            f = fea.internal_force(mesh, pm, u, pre)
            dot = float(np.sum(f * v))
            scale = max(abs(dot), 1e-9)
            worst_force = max(worst_force, abs((ep - em) / (2 * h) - dot)
                              / scale)
            fp = fea.internal_force(mesh, pm, u + h * v, pre)
            fm = fea.internal_force(mesh, pm, u - h * v, pre)
            kt = fea.tangent_stiffness(mesh, pm, u, pre)
            kv = (kt @ v.reshape(-1)).reshape(-1, 3)
            num = (fp - fm) / (2 * h)
            worst_tangent = max(
                worst_tangent,
                float(np.linalg.norm(num - kv) / max(np.linalg.norm(kv),
                                                     1e-9)))
        else:
            u = 0.02 * rng.standard_normal((pocket.n_nodes, 3))
            v = rng.standard_normal((pocket.n_nodes, 3))
            v /= np.linalg.norm(v)
            p = 30.0
            fp = fea.pressure_force(pocket, p, u + h * v, fd=fd)
            fm = fea.pressure_force(pocket, p, u - h * v, fd=fd)
            kp = fea.pressure_stiffness(pocket, p, u, fd=fd)
            kv = (kp @ v.reshape(-1)).reshape(-1, 3)
            num = (fp - fm) / (2 * h)
            worst_press = max(
                worst_press,
                float(np.linalg.norm(num - kv) / max(np.linalg.norm(kv),
                                                     1e-9)))
    ok = worst_force < 1e-6 and worst_tangent < 1e-5 and worst_press < 1e-5
    return _result(
        "gradient", t0, ok,
        f"force {worst_force:.2e} (tol 1e-6), tangent {worst_tangent:.2e}, "
        f"pressure {worst_press:.2e} (tol 1e-5), {n_states} states")


def check_patch(cfg=None):
    """Affine boundary displacement reproduces the affine field inside."""
    t0 = time.perf_counter()
    mesh = geometry.generate_mesh(
        geometry.ActuatorSpec(kind="cube", element_size=0.25))
    pm = _material(cfg)
    grad = np.array([[0.03, 0.01, 0.0],
                     [0.0, -0.02, 0.015],
                     [0.005, 0.0, 0.025]])
    x = mesh.nodes
    lo, hi = x.min(axis=0), x.max(axis=0)
    on_bound = np.any((np.abs(x - lo) < 1e-9) | (np.abs(x - hi) < 1e-9),
                      axis=1)
    mask = np.repeat(on_bound[:, None], 3, axis=1)
    values = x @ grad.T
    case = fea.LoadCase(target_pressure_kpa=0.0, increments=1,
                        fixed_set=None, pressure_set=None)
    sol = fea.solve(mesh, pm, case, prescribed=(mask, values))
    err = float(np.max(np.abs(sol.final_u() - values)))
    return _result("patch", t0, err < 1e-10,
                   f"max deviation from affine field {err:.2e} (tol 1e-10)")


def check_closed_cavity(cfg=None, pressure_kpa=30.0, seed=7):
    """Pressure on a sealed cavity exerts no net force or moment."""
    t0 = time.perf_counter()
    mesh = geometry.generate_mesh(
        geometry.ActuatorSpec(kind="pocket", element_size=1.0))
    from .mesh import face_normal_sum
    _, area = face_normal_sum(mesh, "cavity")
    rng = np.random.default_rng(seed)
    grad = 0.05 * rng.standard_normal((3, 3))
    u = mesh.nodes @ grad.T
    u += 0.3 * np.sin(mesh.nodes / 2.0)
    f = fea.pressure_force(mesh, pressure_kpa, u, face_set="cavity")
    net = float(np.linalg.norm(f.sum(axis=0)))
    x = mesh.nodes + u
    moment = float(np.linalg.norm(np.cross(x, f).sum(axis=0)))
    tol = 1e-8 * pressure_kpa * fea.KPA_TO_MPA * area
    ok = net < tol and moment < tol * 50.0
    return _result(
        "closed-cavity", t0, ok,
        f"|net force| {net:.2e} (tol {tol:.2e}), |net moment| {moment:.2e}")


def check_valve_swing(cfg=None, n_freq=5):
    """Closed-form duty-cycle swing matches brute-force integration."""
    t0 = time.perf_counter()
    cfg = cfg or cfgmod.defaults()
    supply = cfg["earthworm.supply_kpa"]
    tf = cfg["earthworm.tau_fill_s"]
    tv = cfg["earthworm.tau_vent_s"]
    duty = cfg["earthworm.duty"]
    worst = 0.0
    for f in np.linspace(0.3, 1.5, n_freq):
        lo, hi = pneumatics.cycle_amplitude(f, duty, supply, tf, tv)
        blo, bhi = _brute_cycle(f, duty, supply, tf, tv)
        worst = max(worst, abs(lo - blo) / bhi, abs(hi - bhi) / bhi)
    return _result("valve-swing", t0, worst < 1e-3,
                   f"worst relative gap {worst:.2e} over {n_freq} "
                   f"frequencies (tol 1e-3)")


def _brute_cycle(freq, duty, supply, tau_fill, tau_vent, cycles=40,
                 dt=1e-4):
    period = 1.0 / freq
    n = max(2, int(round(period / dt)))
    step = period / n
    n_on = int(round(duty * n))
    plant = pneumatics.PneumaticPlant(supply_kpa=supply, tau_fill_s=tau_fill,
                                      tau_vent_s=tau_vent)
    lo = hi = plant.pressure_kpa
    for _ in range(cycles):
        lo, hi = np.inf, -np.inf
        for k in range(n):
            p = plant.step(step, k < n_on, k >= n_on)
            lo, hi = min(lo, p), max(hi, p)
    return lo, hi


def check_incompressibility(cfg=None, pressure_kpa=40.0):
    """The configured material keeps solid volume within 0.5 percent."""
    t0 = time.perf_counter()
    try:
        pm = _material(cfg)
    except ValueError as exc:
        return _result("incompressibility", t0, False,
                       f"material rejected: {exc}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mesh = geometry.generate_mesh(
            geometry.ActuatorSpec(kind="pocket", element_size=2.0))
    case = fea.LoadCase(target_pressure_kpa=pressure_kpa, increments=8)
    sol = fea.solve(mesh, pm, case)
    pre = fea._Precomputed(mesh)
    f = fea._def_grad(pre, sol.final_u())
    detjw = pre.detjw
    v0 = float(detjw.sum())
    v1 = float((np.linalg.det(f) * detjw).sum())
    rel = abs(v1 - v0) / v0
    return _result("incompressibility", t0, rel < 5e-3,
                   f"solid volume change {rel:.2%} at {pressure_kpa:g} kPa "
                   f"(tol 0.50%)")


def check_cylinder(cfg=None, element_size=2.5, pressure_kpa=50.0):
    """Coarse tube inflation lands near the plane-strain closed form."""
    t0 = time.perf_counter()
    cfg = cfg or cfgmod.defaults()
    c10 = cfg["material.c10_mpa"]
    spec = geometry.ActuatorSpec(kind="tube")
    ref = cylinder_inner_radius_mm(pressure_kpa, spec, c10) \
        - (spec.width / 2.0 - spec.wall)
    got = solve_cylinder(element_size, pressure_kpa, c10_mpa=c10)
    rel = abs(got - ref) / ref
    return _result(
        "cylinder", t0, rel < 0.05,
        f"inner expansion {got:.4f} mm vs closed form {ref:.4f} mm, "
        f"gap {rel:.2%} (tol 5% at this coarseness)")


def _material(cfg):
    if cfg is None:
        return mat.HyperelasticParams(c10=mat.DEFAULT_C10)
    return cfgmod.material_params(cfg)


QUICK_CHECKS = ("gradient", "patch", "closed-cavity", "valve-swing")
FULL_CHECKS = QUICK_CHECKS + ("incompressibility", "cylinder")

_CHECKS = {
    "gradient": check_gradient,
    "patch": check_patch,
    "closed-cavity": check_closed_cavity,
    "valve-swing": check_valve_swing,
    "incompressibility": check_incompressibility,
    "cylinder": check_cylinder,
}


def run_checks(names=QUICK_CHECKS, cfg=None):
    """Run the named checks in order; never raises on a failing check."""
    results = []
    for name in names:
        if name not in _CHECKS:
            known = ", ".join(_CHECKS)
            raise KeyError(f"unknown check {name!r}; known: {known}")
        try:
            results.append(_CHECKS[name](cfg))
        except Exception as exc:  # a crashed check is a failed check
            results.append(CheckResult(name=name, passed=False,
                                       detail=f"crashed: {exc}",
                                       elapsed_s=0.0))
    return results
