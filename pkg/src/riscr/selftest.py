"""Quick oracle checks runnable from an installed package (``sim selftest``)."""
from __future__ import annotations

import itertools

import numpy as np

from .baseband_power import StreamGains, waterfill, weighted_rate, zf_stage
from .manifold import RcgProblem, random_circle_point, rcg_maximize, retract, riemannian_gradient
from .rf_design import compute_q, truncate_svd
from .ris_design import RmState, compute_delta


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def check_manifold(rng):
    a = _crandn(rng, 6, 6)
    a = a @ a.conj().T
    f = lambda z: float(np.real(np.vdot(z, a @ z)))
    eg = lambda z: 2 * a @ z
    z = random_circle_point(rng, 6)
    v = riemannian_gradient(z, _crandn(rng, 6))
    tangent = float(np.max(np.abs(np.real(v * z.conj()))))
    moduli = float(np.max(np.abs(np.abs(retract(z, v)) - 1)))
    d = riemannian_gradient(z, _crandn(rng, 6))
    h = 1e-6
    fd = (f(retract(z, h * d)) - f(retract(z, -h * d))) / (2 * h)
    an = float(np.real(np.vdot(riemannian_gradient(z, eg(z)), d)))
    res = rcg_maximize(RcgProblem(f, eg), z)
    mono = all(b >= a_ - 1e-12 for a_, b in zip(res.trace, res.trace[1:]))
    ok = tangent < 1e-12 and moduli < 1e-12 and abs(fd - an) <= 1e-5 * max(1, abs(an)) and mono
    return ok, f"tangent={tangent:.1e} modulus={moduli:.1e} fd_err={abs(fd - an):.1e}"


def check_rf_identity(rng):
    h = _crandn(rng, 4, 4)
    svd = truncate_svd(h, 4)
    f = np.exp(1j * rng.uniform(0, 2 * np.pi, (4, 4)))
    w = np.exp(1j * rng.uniform(0, 2 * np.pi, (4, 4)))
    alpha = 0.3
    sv = svd.sigma_hat[:, None] * svd.v_hat.conj().T
    full = alpha * np.eye(4) + sv @ f @ w.conj().T @ svd.u_hat
    q = compute_q(svd, f[:, 1:], w[:, 1:], alpha)
    excl = alpha * np.eye(4) + sv @ f[:, 1:] @ w[:, 1:].conj().T @ svd.u_hat
    rhs = np.linalg.det(excl) * (1 + w[:, 0].conj() @ q @ f[:, 0])
    err = abs(np.linalg.det(full) - rhs) / abs(rhs)
    return err < 1e-8, f"rel_err={err:.1e}"


def check_ris_identity(rng):
    r, t = _crandn(rng, 4, 4), _crandn(rng, 4, 4)
    phi = random_circle_point(rng, 4)
    st = RmState(phi, [r], [t])
    alpha = 0.2
    delta = compute_delta(st, 0, 2, alpha)
    full = np.linalg.det(alpha * np.eye(4) + (r * phi) @ t)
    phi_ex = phi.copy()
    phi_ex[2] = 0
    excl = np.linalg.det(alpha * np.eye(4) + (r * phi_ex) @ t)
    err = abs(full - excl * (1 + phi[2] * delta)) / abs(full)
    return err < 1e-8, f"rel_err={err:.1e}"


def check_waterfill(rng, instances: int = 5, steps: int = 60):
    worst = 0.0
    for _ in range(instances):
        g = StreamGains(rng.uniform(0.5, 5, (2, 2)), rng.uniform(0.1, 1, (2, 2)),
                        rng.uniform(0.5, 2, (2, 2)), np.ones((2, 2)))
        p_t, i_th = 1.0, rng.uniform(0.1, 1.0)
        wf = weighted_rate(g, waterfill(g, 1.0, p_t, i_th).p, 1.0)
        best = -np.inf
        t, z = g.t.ravel(), g.zeta.ravel()
        for s in itertools.product(np.linspace(0, p_t, steps), repeat=3):
            p = np.zeros(4)
            p[:3] = np.array(s) / t[:3]
            rem = min(p_t - np.dot(t[:3], p[:3]), (i_th - np.dot(z[:3], p[:3])) * t[3] / z[3])
            if rem < 0:
                continue
            p[3] = rem / t[3]
            best = max(best, weighted_rate(g, p.reshape(2, 2), 1.0))
        worst = max(worst, best - wf)
    return worst <= 1e-3, f"max(grid - waterfill)={worst:.1e}"


def check_zf(rng):
    h = _crandn(rng, 8, 8) + 3 * np.eye(8)
    f2, status = zf_stage(h)
    err = float(np.linalg.norm(h @ f2 - np.eye(8)))
    return err < 1e-8 and status == "ok", f"residual={err:.1e}"


CHECKS = {
    "manifold": check_manifold,
    "rf_determinant_identity": check_rf_identity,
    "ris_determinant_identity": check_ris_identity,
    "waterfill_vs_grid": check_waterfill,
    "zf_residual": check_zf,
}


def run_all(rng: np.random.Generator) -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # report rather than abort the remaining checks
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
