"""Total-Lagrangian finite element solver for pressurized actuators.

Displacement-based quadratic tets, 4-point quadrature, Neo-Hookean
material, and a follower pressure load integrated on the deformed cavity
surface.  The Newton linearization carries both the material/geometric
stiffness and the unsymmetric pressure load stiffness, so convergence
near the solution is quadratic.  Increments that fail to converge or
invert an element are bisected down to 1/32 of the nominal step before
the solver gives up.

Units: mm, N, MPa internally; pressures cross the API in kPa.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from . import material as mat
from .elements import tet10_shape_grad, tet_quadrature, tri6_shape, tri6_shape_grad, tri_quadrature

KPA_TO_MPA = 1e-3
REL_TOL = 1e-6
ABS_TOL = 1e-10          # newtons
MAX_NEWTON_ITERS = 30
MAX_BISECTIONS = 5
DIVERGENCE_FACTOR = 1e6

_EYE = np.eye(3)
_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS3[_i, _j, _k] = 1.0
    _EPS3[_i, _k, _j] = -1.0


class StepRejected(RuntimeError):
    """Internal signal: the trial increment left the admissible range."""


class SolveError(RuntimeError):
    """Raised when bisection bottoms out without convergence."""


@dataclass(frozen=True)
class LoadCase:
    """Pressure ramp on one face set with homogeneous supports.

    ``extra_fixed`` lists (node_set, axis) pairs pinning single
    components, e.g. ("end0", "z"); the main ``fixed_set`` pins all
    three.  Either may be None when the case needs no such support.
    """

    target_pressure_kpa: float
    increments: int = 300
    fixed_set: str = "fixed"
    pressure_set: str = "cavity"
    extra_fixed: tuple = ()

    def __post_init__(self):
        if self.target_pressure_kpa < 0:
            raise ValueError("vacuum loading is not supported; "
                             f"got {self.target_pressure_kpa} kPa")
        if self.increments < 1:
            raise ValueError(f"increments must be >= 1, got {self.increments}")


@dataclass
class Solution:
    """Accepted increments of a pressure ramp, first entry always 0 kPa."""

    pressures_kpa: np.ndarray
    displacements: list
    log: list = field(default_factory=list)

    @property
    def n_increments(self):
        return len(self.displacements)

    def final_u(self):
        return self.displacements[-1]


# ---------------------------------------------------------------- kernels

class _Precomputed:
    """Reference-configuration shape data reused across assemblies."""

    def __init__(self, mesh):
        qp, w = tet_quadrature()
        dn_ref = tet10_shape_grad(qp)                      # (q, 10, 3)
        xe = mesh.nodes[mesh.tets]                         # (M, 10, 3)
        jac = np.einsum("eam,qad->eqmd", xe, dn_ref)       # J_md = dX_m/dxi_d
        det = np.linalg.det(jac)
        if np.any(det <= 0.0):
            bad = int(np.argwhere(np.any(det <= 0.0, axis=1))[0, 0])
            raise ValueError(f"element {bad} has non-positive reference "
                             f"Jacobian; mesh is inverted")
        inv = np.linalg.inv(jac)                           # (M, q, 3, 3)
        self.dndx = np.einsum("qad,eqdm->eqam", dn_ref, inv)
        self.detjw = det * w[None, :]
        self.tets = mesh.tets
        self.n_nodes = mesh.n_nodes


def _def_grad(pre, u):
    ue = u[pre.tets]                                       # (M, 10, 3)
    h = np.einsum("eam,eqaj->eqmj", ue, pre.dndx)
    return h + _EYE


def total_strain_energy(mesh, params, u, pre=None):
    """Integral of the energy density over the reference solid, in mJ."""
    pre = pre or _Precomputed(mesh)
    f = _def_grad(pre, u)
    state = mat.DeformationState.from_gradient(f)
    w = mat.strain_energy(params, state)
    return float(np.einsum("eq,eq->", w, pre.detjw))


def internal_force(mesh, params, u, pre=None):
    """Nodal internal force (N, 3); the gradient of the strain energy."""
    pre = pre or _Precomputed(mesh)
    f = _def_grad(pre, u)
    s = mat.pk2_stress(params, f)
    p1 = np.einsum("eqij,eqjk->eqik", f, s)
    fe = np.einsum("eqij,eqaj,eq->eai", p1, pre.dndx, pre.detjw)
    out = np.zeros((pre.n_nodes, 3))
    np.add.at(out, pre.tets, fe)
    return out


def tangent_stiffness(mesh, params, u, pre=None, chunk=4096):
    """Sparse consistent tangent d f_int / d u, (3N, 3N) CSC."""
    pre = pre or _Precomputed(mesh)
    f = _def_grad(pre, u)
    s = mat.pk2_stress(params, f)
    cc = mat.lagrangian_tangent(params, f)
    n_dof = 3 * pre.n_nodes

    blocks = []
    for lo in range(0, pre.tets.shape[0], chunk):
        sl = slice(lo, lo + chunk)
        dndx, detjw = pre.dndx[sl], pre.detjw[sl]
        fd = np.einsum("eqiJ,eqJKLM,eqkL->eqiKkM", f[sl], cc[sl], f[sl])
        t1 = np.einsum("eqaK,eqiKkM->eqaikM", dndx, fd)
        ke = np.einsum("eqaikM,eqbM,eq->eaibk", t1, dndx, detjw)
        kgeo = np.einsum("eqaJ,eqJL,eqbL,eq->eab", dndx, s[sl], dndx, detjw)
        ke += kgeo[:, :, None, :, None] * _EYE[None, None, :, None, :]

        dof = (3 * pre.tets[sl][:, :, None] + np.arange(3)).reshape(-1, 30)
        rows = np.broadcast_to(dof[:, :, None], (dof.shape[0], 30, 30))
        cols = np.broadcast_to(dof[:, None, :], (dof.shape[0], 30, 30))
        blocks.append(sparse.coo_matrix(
            (ke.reshape(-1, 30, 30).ravel(),
             (rows.ravel(), cols.ravel())), shape=(n_dof, n_dof)).tocsc())
    k = blocks[0]
    for b in blocks[1:]:
        k = k + b
    return k


class _FaceData:
    def __init__(self, mesh, face_set):
        self.faces = mesh.face_set(face_set)
        qp, self.w = tri_quadrature()
        self.shape = tri6_shape(qp)                        # (q, 6)
        self.grad = tri6_shape_grad(qp)                    # (q, 6, 2)
        xf = mesh.nodes[self.faces]
        t = np.einsum("fam,qad->fqmd", xf, self.grad)
        self.ref_norm = np.linalg.norm(
            np.cross(t[..., 0], t[..., 1]), axis=2)        # (K, q)
        self.n_nodes = mesh.n_nodes


def _deformed_normals(fd, mesh, u):
    xf = (mesh.nodes + u)[fd.faces]
    t = np.einsum("fam,qad->fqmd", xf, fd.grad)
    nvec = np.cross(t[..., 0], t[..., 1])
    norms = np.linalg.norm(nvec, axis=2)
    if np.any(norms < 1e-9 * fd.ref_norm):
        raise StepRejected("pressure face degenerated to zero area")
    return t, nvec


def pressure_force(mesh, pressure_kpa, u, face_set="cavity", fd=None):
    """Follower load: nodal forces of ``pressure_kpa`` acting on the
    deformed face set, pushing the wall out of the cavity."""
    fd = fd or _FaceData(mesh, face_set)
    _, nvec = _deformed_normals(fd, mesh, u)
    p = KPA_TO_MPA * pressure_kpa
    fe = -p * np.einsum("qa,fqi,q->fai", fd.shape, nvec, fd.w)
    out = np.zeros((fd.n_nodes, 3))
    np.add.at(out, fd.faces, fe)
    return out


def pressure_stiffness(mesh, pressure_kpa, u, face_set="cavity", fd=None):
    """Sparse d f_pressure / d u; unsymmetric load stiffness."""
    fd = fd or _FaceData(mesh, face_set)
    t, _ = _deformed_normals(fd, mesh, u)
    p = KPA_TO_MPA * pressure_kpa
    a1 = np.einsum("imk,fqk->fqim", _EPS3, t[..., 1])
    a2 = np.einsum("ijm,fqj->fqim", _EPS3, t[..., 0])
    ke = -p * (np.einsum("qa,q,fqim,qb->faibm", fd.shape, fd.w, a1, fd.grad[:, :, 0])
               + np.einsum("qa,q,fqim,qb->faibm", fd.shape, fd.w, a2, fd.grad[:, :, 1]))
    dof = (3 * fd.faces[:, :, None] + np.arange(3)).reshape(-1, 18)
    rows = np.broadcast_to(dof[:, :, None], (dof.shape[0], 18, 18))
    cols = np.broadcast_to(dof[:, None, :], (dof.shape[0], 18, 18))
    n_dof = 3 * fd.n_nodes
    return sparse.coo_matrix(
        (ke.reshape(-1, 18, 18).ravel(), (rows.ravel(), cols.ravel())),
        shape=(n_dof, n_dof)).tocsc()


# ----------------------------------------------------------------- solver

_AXIS = {"x": 0, "y": 1, "z": 2}


def _fixed_mask(mesh, case):
    mask = np.zeros((mesh.n_nodes, 3), dtype=bool)
    if case.fixed_set:
        mask[mesh.node_set(case.fixed_set)] = True
    for name, axis in case.extra_fixed:
        mask[mesh.node_set(name), _AXIS[axis]] = True
    return mask


def _newton(mesh, params, pre, fd, pressure_kpa, u0, free, prescribed_u,
            full_newton=False):
    """Solve one pressure level; returns (u, iterations, residual history).

    The factorized tangent is reused across iterations and rebuilt only
    when the residual contraction degrades, which costs a few extra
    cheap iterations but saves most of the sparse factorizations.
    """
    u = u0.copy()
    if prescribed_u is not None:
        u = np.where(free.reshape(-1, 3), u, prescribed_u)
    history = []
    first = None
    lu = None
    for it in range(MAX_NEWTON_ITERS):
        try:
            fint = internal_force(mesh, params, u, pre)
            fext = (pressure_force(mesh, pressure_kpa, u, fd=fd)
                    if fd is not None else np.zeros_like(fint))
        except mat.InvalidDeformation as exc:
            raise StepRejected(str(exc)) from None
        resid = (fint - fext).reshape(-1)[free]
        rnorm = float(np.linalg.norm(resid))
        fnorm = float(np.linalg.norm(fext.reshape(-1)[free]))
        if rnorm <= max(REL_TOL * fnorm, ABS_TOL):
            history.append(rnorm)
            return u, it, history
        if first is None:
            first = max(rnorm, ABS_TOL)
        elif rnorm > DIVERGENCE_FACTOR * first:
            raise StepRejected(f"Newton diverged, residual {rnorm:.3e}")
        stalled = history and rnorm > 0.3 * history[-1]
        history.append(rnorm)
        if lu is None or full_newton or stalled:
            try:
                kt = tangent_stiffness(mesh, params, u, pre)
                if fd is not None:
                    kt = kt - pressure_stiffness(mesh, pressure_kpa, u, fd=fd)
            except mat.InvalidDeformation as exc:
                raise StepRejected(str(exc)) from None
            kff = kt.tocsr()[free][:, free].tocsc()
            lu = splu(kff)
        du = lu.solve(-resid)
        u = u.reshape(-1)
        u[free] += du
        u = u.reshape(-1, 3)
    raise StepRejected(f"no convergence in {MAX_NEWTON_ITERS} Newton iterations")


def solve(mesh, params, case, prescribed=None, verbose=False,
          full_newton=False):
    """Ramp the pressure of ``case`` from zero to its target.

    ``prescribed`` optionally carries (mask, values) for inhomogeneous
    supports: boolean (N, 3) and target displacements, ramped with the
    load.  Returns a Solution whose first increment is the reference
    state.  Raises SolveError when an increment cannot be converged even
    after ``MAX_BISECTIONS`` halvings.  ``full_newton`` rebuilds the
    tangent every iteration instead of reusing factorizations.
    """
    pre = _Precomputed(mesh)
    fd = None
    if case.target_pressure_kpa > 0.0:
        fd = _FaceData(mesh, case.pressure_set)

    mask = _fixed_mask(mesh, case)
    values = np.zeros((mesh.n_nodes, 3))
    if prescribed is not None:
        pmask, pvalues = prescribed
        mask = mask | pmask
        values = np.where(pmask, pvalues, values)
    free = ~mask.reshape(-1)
    if not np.any(mask):
        raise SolveError("load case leaves the body unconstrained; "
                         "rigid modes make the tangent singular")

    u = np.zeros((mesh.n_nodes, 3))
    sol = Solution(pressures_kpa=np.zeros(1), displacements=[u.copy()])
    sol.log.append({"pressure_kpa": 0.0, "iterations": 0, "residuals": []})
    if case.target_pressure_kpa == 0.0 and prescribed is None:
        return sol

    target = case.target_pressure_kpa
    dt0 = 1.0 / case.increments
    floor = dt0 / 2 ** MAX_BISECTIONS
    t, dt = 0.0, dt0
    u_prev, dt_prev = None, None
    pressures = [0.0]
    while t < 1.0 - 1e-12:
        dt = min(dt, 1.0 - t)
        trial = t + dt
        # Secant predictor: extrapolating the previous increment usually
        # starts Newton inside its contraction basin.
        starts = [u]
        if u_prev is not None and dt_prev > 0.0:
            starts.insert(0, u + (u - u_prev) * (dt / dt_prev))
        try:
            last_exc = None
            for u_start in starts:
                try:
                    un, iters, hist = _newton(
                        mesh, params, pre, fd, trial * target, u_start, free,
                        trial * values if prescribed is not None else None,
                        full_newton=full_newton)
                    break
                except StepRejected as exc:
                    last_exc = exc
            else:
                raise last_exc
        except StepRejected as exc:
            dt *= 0.5
            if dt < floor - 1e-15:
                raise SolveError(
                    f"increment at {trial * target:.4g} kPa failed after "
                    f"{MAX_BISECTIONS} bisections: {exc}") from exc
            if verbose:
                print(f"  bisect: {exc}; retry with dt={dt:.4g}")
            continue
        u_prev, dt_prev = u, dt
        t, u = trial, un
        pressures.append(t * target)
        sol.displacements.append(u.copy())
        sol.log.append({"pressure_kpa": t * target, "iterations": iters,
                        "residuals": hist})
        if verbose:
            print(f"  p={t * target:9.3f} kPa  iters={iters}  "
                  f"resid={hist[-1]:.3e}")
        dt = min(dt0, dt * 2.0)
    sol.pressures_kpa = np.asarray(pressures)
    return sol


# ----------------------------------------------------------- measurements

def _tip_set(mesh, node_set):
    if node_set is not None:
        return mesh.node_set(node_set)
    for name in ("tip", "end1"):
        if name in mesh.node_sets:
            return mesh.node_sets[name]
    raise KeyError("mesh has neither a 'tip' nor an 'end1' node set; "
                   "pass node_set explicitly")


def measure_elongation(mesh, solution, node_set=None):
    """Axial (z) displacement of the free-end centroid per increment, mm."""
    ids = _tip_set(mesh, node_set)
    return np.array([float(np.mean(u[ids, 2])) for u in solution.displacements])


def _plane_normal(coords):
    c = coords - coords.mean(axis=0)
    svals = np.linalg.svd(c, compute_uv=False)
    if svals[1] < 1e-9 * max(svals[0], 1e-30):
        raise ValueError("end-face nodes are collinear; plane normal "
                         "is not defined")
    _, _, vt = np.linalg.svd(c, full_matrices=False)
    return vt[2]


def measure_bend_angle(mesh, solution, node_set=None):
    """Tip-plane rotation per increment, degrees in [0, 180).

    The normal of the best-fit plane through the free-end nodes is
    tracked with sign continuity across increments, so angles beyond 90
    degrees are reported correctly.
    """
    ids = _tip_set(mesh, node_set)
    ref = _plane_normal(mesh.nodes[ids])
    prev = ref
    angles = []
    for u in solution.displacements:
        n = _plane_normal(mesh.nodes[ids] + u[ids])
        if np.dot(n, prev) < 0.0:
            n = -n
        prev = n
        cosang = float(np.clip(np.dot(n, ref), -1.0, 1.0))
        angles.append(math.degrees(math.acos(cosang)))
    return np.array(angles)


def measure_max_displacement(solution):
    """Largest nodal displacement magnitude per increment, mm."""
    return np.array([float(np.max(np.linalg.norm(u, axis=1)))
                     for u in solution.displacements])


def measure_radial_expansion(mesh, solution, node_set="inner"):
    """Mean radial (xy) displacement of a node set per increment, mm."""
    ids = mesh.node_set(node_set)
    r0 = np.linalg.norm(mesh.nodes[ids, :2], axis=1)
    out = []
    for u in solution.displacements:
        r = np.linalg.norm(mesh.nodes[ids, :2] + u[ids, :2], axis=1)
        out.append(float(np.mean(r - r0)))
    return np.array(out)


def solution_table(mesh, solution, node_set=None):
    """Rows of (increment, pressure_kPa, elongation_mm, bend_angle_deg,
    max_displacement_mm) for CSV export."""
    elo = measure_elongation(mesh, solution, node_set)
    bend = measure_bend_angle(mesh, solution, node_set)
    disp = measure_max_displacement(solution)
    rows = []
    for i, p in enumerate(solution.pressures_kpa):
        rows.append((i, float(p), elo[i], bend[i], disp[i]))
    return rows


def write_solution_csv(mesh, solution, path, node_set=None):
    rows = solution_table(mesh, solution, node_set)
    with open(path, "w", newline="") as fh:
        fh.write("increment,pressure_kPa,elongation_mm,bend_angle_deg,"
                 "max_displacement_mm\n")
        for i, p, e, b, d in rows:
            fh.write(f"{i},{p:.6g},{e:.6g},{b:.6g},{d:.6g}\n")
