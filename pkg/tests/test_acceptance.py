"""Acceptance gate: the eleven end-to-end criteria at their stated tolerances.

Each criterion is a function returning ``(ok, detail)``; the pytest wrapper
prints one ``AC-n PASS/FAIL: detail`` line per criterion.  Run
``python -m tests.test_acceptance`` to get the same lines without pytest.
"""

import math

import numpy as np
import pytest

from alphaflow import meshes
from alphaflow.complex_core import build_surface
from alphaflow.flow2d import (
    FlowConfig,
    integrate_alpha_flow,
    integrate_modified_flow,
    normalize_product,
    potential_along_path,
    potential_gradient,
    ricci_potential,
)
from alphaflow.flow3d import gamma_field, integrate_alpha_flow_3d, stability_analysis
from alphaflow.ode import IntegratorConfig, integrate
from alphaflow.packing2d import alpha_curvature, curvature_jacobian_u, gauss_curvature
from alphaflow.packing3d import (
    cr_curvature,
    curvature_jacobian_r,
    ehr_functional,
    nondegeneracy_Q,
    random_admissible_metric,
    solid_angles_dihedral,
    solid_angles_lhuilier,
)
from alphaflow.spectral import fd_jacobian, hessian_potential_2d
from alphaflow.thurston import admissible_curvature_membership, ge_xu_condition, thurston_condition

SEED = 20240601
SURFACES = {"tetrahedron": meshes.tetrahedron, "octahedron": meshes.octahedron, "torus7": meshes.torus7}


def _rng(k):
    return np.random.default_rng([SEED, k])


def _radii(rng, n, spread=1.0):
    return np.exp(rng.uniform(-spread, spread, n))


def _weighted(rng, builder):
    base = builder()
    w = {tuple(e): float(rng.uniform(0.0, math.pi / 2)) for e in base.edges.tolist()}
    return build_surface(base.vertex_count, base.faces.tolist(), w)


def _adjacency(surface):
    n = surface.vertex_count
    A = np.zeros((n, n), dtype=bool)
    i, j = surface.edges.T
    A[i, j] = A[j, i] = True
    return A


def ac1():
    rng = _rng(1)
    worst = 0.0
    for name, builder in SURFACES.items():
        for block in range(10):
            surf = _weighted(rng, builder)
            target = 2 * math.pi * surf.euler_characteristic
            for _ in range(100):
                K = gauss_curvature(surf, _radii(rng, surf.vertex_count, 2.0))
                worst = max(worst, abs(K.sum() - target))
    return worst <= 1e-9, f"max |sum K - 2 pi chi| = {worst:.2e} over 3000 metrics"


def ac2():
    rng = _rng(2)
    rel_err, asym, min_eig, ker, sign_ok = 0.0, 0.0, math.inf, 0.0, True
    builders = list(SURFACES.values())
    for k in range(100):
        surf = _weighted(rng, builders[k % 3])
        n = surf.vertex_count
        r = _radii(rng, n)
        L = curvature_jacobian_u(surf, r)
        fd = fd_jacobian(lambda u: gauss_curvature(surf, np.exp(u)), np.log(r))
        rel_err = max(rel_err, np.linalg.norm(L - fd) / np.linalg.norm(L))
        asym = max(asym, np.abs(L - L.T).max())
        min_eig = min(min_eig, np.linalg.eigvalsh(0.5 * (L + L.T)).min())
        ker = max(ker, np.abs(L @ np.ones(n)).max())
        A = _adjacency(surf)
        off = ~np.eye(n, dtype=bool)
        # weights lie in [0, pi/2) almost surely, so adjacent entries are strictly negative
        sign_ok &= bool(np.all(L[A] < 0) and np.all(L[off & ~A] == 0) and np.all(np.diag(L) > 0))
    ok = rel_err <= 1e-5 and asym <= 1e-9 and min_eig >= -1e-9 and ker <= 1e-9 and sign_ok
    return ok, (f"rel Frobenius err {rel_err:.1e}, asym {asym:.1e}, min eig {min_eig:.1e}, "
                f"kernel {ker:.1e}, sign pattern {'ok' if sign_ok else 'violated'}")


def ac3():
    rng = _rng(3)
    torus = meshes.torus7()
    drifts = {}
    for alpha in (-1.0, 0.0, 1.0, 2.0):
        cfg = FlowConfig(alpha=alpha, t_end=50.0, stop_on_converge=False)
        tr = integrate_alpha_flow(torus, _radii(rng, 7), cfg)
        drifts[alpha] = tr.conserved_drift if tr.times[-1] == 50.0 else math.inf
    worst = max(drifts.values())
    return worst <= 1e-8, "sum-u drift to t=50: " + ", ".join(f"a={a:g}: {d:.1e}" for a, d in drifts.items())


def ac4():
    rng = _rng(4)
    torus = meshes.torus7()
    worst, worst_rate, failures = 0.0, -math.inf, 0
    for alpha in (-1.0, 0.0, 1.0, 2.0):
        for _ in range(20):
            r0, _ = normalize_product(_radii(rng, 7))
            tr = integrate_alpha_flow(torus, r0, FlowConfig(alpha=alpha, t_end=500.0))
            failures += not tr.converged
            worst = max(worst, np.abs(tr.final_radii - 1).max())
            worst_rate = max(worst_rate, tr.rate)
    ok = failures == 0 and worst <= 1e-6 and worst_rate < 0
    return ok, f"80 runs, {failures} not converged, max |r - 1| = {worst:.1e}, slowest rate {worst_rate:.3f}"


def ac5():
    rng = _rng(5)
    tetra = meshes.tetrahedron()
    torus = meshes.torus7()
    path_err = grad_err = hess_err = 0.0
    for alpha in (-1.0, 0.0, 1.0, 2.0):
        base = np.zeros(4)
        u = rng.normal(scale=0.4, size=4)
        corner = np.array([u[0], 0.0, u[2], 0.0])
        path_err = max(path_err, abs(ricci_potential(tetra, u, base, alpha)
                                     - potential_along_path(tetra, [base, corner, u], alpha)))
        g = fd_jacobian(lambda x: np.array([ricci_potential(tetra, x, base, alpha)]), u)[0]
        r = np.exp(u)
        ra = r**alpha
        grad_err = max(grad_err, np.abs(g - (gauss_curvature(tetra, r) - 4 * math.pi * ra / ra.sum())).max(),
                       np.abs(g - potential_gradient(tetra, alpha)(u)).max())

        h = 1e-3

        def F(x):
            return ricci_potential(tetra, x, u, alpha)

        H_fd = np.empty((4, 4))
        E = np.eye(4) * h
        for i in range(4):
            for j in range(4):
                H_fd[i, j] = (F(u + E[i] + E[j]) - F(u + E[i] - E[j]) - F(u - E[i] + E[j])
                              + F(u - E[i] - E[j])) / (4 * h * h)
        hess_err = max(hess_err, np.abs(hessian_potential_2d(tetra, r, alpha) - H_fd).max())
    rise = -math.inf
    for alpha in (-1.0, 1.0):
        tr = integrate_alpha_flow(torus, _radii(rng, 7), FlowConfig(alpha=alpha, t_end=20.0, track_potential=True))
        rise = max(rise, np.diff(tr.potential).max())
    ok = path_err <= 1e-8 and grad_err <= 1e-5 and hess_err <= 1e-4 and rise <= 0.0
    return ok, (f"path {path_err:.1e}, FD gradient {grad_err:.1e}, FD Hessian {hess_err:.1e}, "
                f"largest per-step change of F {rise:.1e}")


def ac6():
    rng = _rng(6)
    tetra = meshes.tetrahedron()
    rep = thurston_condition(tetra)
    want = {1: (math.pi, -math.pi), 2: (2 * math.pi, 0.0), 3: (3 * math.pi, 2 * math.pi)}
    err = 0.0
    for v in rep.verdicts():
        lhs, rhs = want[len(v.subset)]
        err = max(err, abs(v.lhs - lhs), abs(v.rhs - rhs))
    hand = len(rep) == 14 and rep.passed and err <= 1e-12
    same = True
    for builder in SURFACES.values():
        surf = _weighted(rng, builder)
        a = thurston_condition(surf)
        b = ge_xu_condition(surf, np.ones(surf.vertex_count), 1.3)
        same &= bool(np.array_equal(a.passed_flags, b.passed_flags) and np.array_equal(a.masks, b.masks))
    member = 0
    builders = list(SURFACES.values())
    for k in range(100):
        surf = _weighted(rng, builders[k % 3])
        member += admissible_curvature_membership(surf, gauss_curvature(surf, _radii(rng, surf.vertex_count))).passed
    ok = hand and same and member == 100
    return ok, (f"tetrahedron 14 subsets max err {err:.1e}, ge_xu(r*=1) agrees: {same}, "
                f"membership of K(r): {member}/100")


def _conformal_tet(rng):
    while True:
        r = np.exp(rng.uniform(-1, 1, 4))
        if nondegeneracy_Q(*r) > 0:
            return np.array([r[a] + r[b] for a in range(4) for b in range(a + 1, 4)])


def ac7():
    rng = _rng(7)
    q1 = nondegeneracy_Q(1, 1, 1, 1)
    q2 = nondegeneracy_Q(1, 1, 1, 0.1)
    simplex = meshes.boundary_4simplex()
    closed = 8 * math.pi - 12 * math.acos(1 / 3)
    kerr = np.abs(cr_curvature(simplex, np.ones(5)) - closed).max()
    aerr = max(np.abs(solid_angles_lhuilier(L) - solid_angles_dihedral(L)).max()
               for L in (_conformal_tet(rng) for _ in range(1000)))
    ok = q1 == 8 and abs(q2 + 37) <= 1e-12 and kerr <= 1e-9 and aerr <= 1e-10
    return ok, f"Q = {q1:g}, {q2:.12g}; K err {kerr:.1e}; L'Huilier vs dihedral {aerr:.1e}"


def ac8():
    rng = _rng(8)
    simplex = meshes.boundary_4simplex()
    asym = kern = grad = 0.0
    min_eig, rank_ok = math.inf, True
    for k in range(100):
        r = random_admissible_metric(simplex, rng)
        Lam, a = curvature_jacobian_r(simplex, r, return_asymmetry=True)
        asym = max(asym, a)
        nrm = np.abs(Lam).sum(axis=1).max()
        kern = max(kern, np.abs(Lam @ r).max() / nrm)
        w = np.linalg.eigvalsh(Lam)
        min_eig = min(min_eig, w[0])
        rank_ok &= bool(np.count_nonzero(w > 1e-6 * nrm) == 4)
        if k < 20:
            g = fd_jacobian(lambda x: np.array([ehr_functional(simplex, x)]), r)[0]
            grad = max(grad, np.abs(g - cr_curvature(simplex, r)).max())
    ok = asym <= 1e-6 and kern <= 1e-6 and min_eig >= -1e-6 and rank_ok and grad <= 1e-5
    return ok, (f"asym {asym:.1e}, |Lam r|/|Lam| {kern:.1e}, min eig {min_eig:.1e}, rank N-1: {rank_ok}, "
                f"grad S vs K {grad:.1e}")


def ac9():
    simplex = meshes.boundary_4simplex()
    r_star = np.ones(5) / math.sqrt(5)
    rng = _rng(9)
    d = rng.normal(size=5)
    d -= d.mean()
    r0 = r_star + 0.02 * d / np.linalg.norm(d)
    tr = integrate_alpha_flow_3d(simplex, r0, FlowConfig(alpha=0.0, t_end=100.0, stop_on_converge=False))
    drift = tr.conserved_drift if tr.times[-1] == 100.0 else math.inf
    fixed = np.abs(gamma_field(simplex, r_star, 0.0)).max()
    still = integrate_alpha_flow_3d(simplex, r_star, FlowConfig(alpha=0.0, t_end=50.0, stop_on_converge=False))
    fixed = max(fixed, np.abs(still.final_radii - r_star).max())
    back, t_max = 0.0, 0.0
    for seed in range(20):
        g = np.random.default_rng([SEED, 9, seed]).normal(size=5)
        g -= g.mean()
        r0 = r_star + 0.01 * np.linalg.norm(r_star) * g / np.linalg.norm(g)
        tr = integrate_alpha_flow_3d(simplex, r0, FlowConfig(alpha=0.0, t_end=200.0, tol=1e-9))
        back = max(back, np.abs(tr.final_radii - r_star).max())
        t_max = max(t_max, tr.times[-1])
    rep = stability_analysis(simplex, r_star, 0.0)
    ok = drift <= 1e-8 and fixed <= 1e-12 and back <= 1e-6 and t_max <= 200 and rep.stable \
        and rep.kernel_residual <= 1e-6
    return ok, (f"norm drift {drift:.1e}, fixed point {fixed:.1e}, 20 seeds back within {back:.1e} by t={t_max:.1f}, "
                f"{rep.verdict} (lambda1 {rep.lambda1:.4f}), kernel residual {rep.kernel_residual:.1e}")


def ac10():
    rng = _rng(10)
    tetra = meshes.tetrahedron()
    rbar = _radii(rng, 4, 0.4)
    Rbar = alpha_curvature(tetra, rbar, -1.0)
    finals, failures = [], 0
    for _ in range(10):
        tr = integrate_modified_flow(tetra, _radii(rng, 4, 1.0),
                                     FlowConfig(alpha=-1.0, t_end=500.0, prescribed=Rbar))
        failures += not tr.converged
        finals.append(tr.final_radii)
    finals = np.array(finals)
    err = np.abs(finals - rbar).max()
    spread = np.ptp(finals, axis=0).max()
    ok = bool(np.all(Rbar > 0)) and failures == 0 and err <= 1e-6
    return ok, f"10 starts, {failures} not converged, max |r - rbar| = {err:.1e}, spread of limits {spread:.1e}"


def ac11():
    def decay(t, y):
        return -y

    tr = integrate(decay, [1.0], 1.0)
    err = abs(tr.y_final[0] - math.exp(-1))
    ns, es = [], []
    for k in range(12):
        tol = 1e-5 * 2.0 ** (-2 * k)
        t = integrate(decay, [1.0], 1.0, IntegratorConfig(atol=tol, rtol=tol))
        ns.append(t.n_accepted)
        es.append(abs(t.y_final[0] - math.exp(-1)))
    order = -np.polyfit(np.log(ns), np.log(es), 1)[0]

    def osc(t, y):
        return np.array([y[1], -y[0]])

    a = integrate(osc, [1.0, 0.5], 20.0)
    b = integrate(osc, [1.0, 0.5], 20.0)
    same = np.array_equal(a.t, b.t) and np.array_equal(a.y, b.y)
    ok = err <= 1e-9 and order >= 4 and same
    return ok, f"decay error {err:.1e}, observed order {order:.2f}, bitwise rerun: {same}"


CRITERIA = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11]


def report(n, fn):
    ok, detail = fn()
    line = f"AC-{n} {'PASS' if ok else 'FAIL'}: {detail}"
    return ok, line


@pytest.mark.parametrize("n", range(1, len(CRITERIA) + 1), ids=[f"AC-{k}" for k in range(1, len(CRITERIA) + 1)])
def test_acceptance(n, capsys):
    ok, line = report(n, CRITERIA[n - 1])
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [report(k, fn) for k, fn in enumerate(CRITERIA, 1)]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
