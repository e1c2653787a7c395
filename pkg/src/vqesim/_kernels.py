"""Training-loop kernels: a numba fast path and an equivalent numpy twin.

The loop is shared by both ansatz families through the slot layout prepared
in dynamics.py: slot j applies av[j]·diag(exp(-i·theta_j·lam[g_j]))·vh[g_j],
where av[j] folds the frozen unitary (if any) with the generator eigenbasis.

Step semantics: scalars recorded at step s describe theta after s updates;
the gradient update then produces theta_{s+1}. Convergence is checked on the
recorded overlap error. A negative conv_threshold disables early stopping.
"""

from __future__ import annotations

import os

import numpy as np

STATUS_BUDGET = 0
STATUS_CONVERGED = 1
STATUS_ABORTED = 2


def _train_loop_py(
    av,
    vh,
    lam,
    hmat,
    gen_of,
    m,
    psi0,
    gspace,
    theta0,
    eta,
    max_steps,
    conv_threshold,
    noise,
    record_stride,
    theta_snap_steps,
):
    p, d = av.shape[0], av.shape[1]
    n_rec_cap = max_steps // record_stride + 3
    rec_steps = np.zeros(n_rec_cap, dtype=np.int64)
    rec_loss = np.zeros(n_rec_cap)
    rec_err = np.zeros(n_rec_cap)
    rec_dinf = np.zeros(n_rec_cap)
    rec_d2 = np.zeros(n_rec_cap)
    theta_snaps = np.zeros((len(theta_snap_steps), p))
    theta = theta0.copy()
    tmat = np.zeros((p, d, d), dtype=np.complex128)
    n_rec = 0
    snap_i = 0
    best_err = np.inf
    status = STATUS_BUDGET
    stop_step = max_steps
    for step in range(max_steps):
        psi = psi0
        for j in range(p):
            ph = np.exp(-1j * theta[j] * lam[gen_of[j]])
            tmat[j] = (av[j] * ph[None, :]) @ vh[gen_of[j]]
            psi = tmat[j] @ psi
        mpsi = m @ psi
        loss = np.vdot(psi, mpsi).real
        ov = gspace.conj().T @ psi
        err = 1.0 - float(np.vdot(ov, ov).real)
        if not np.isfinite(loss) or not np.isfinite(err):
            status = STATUS_ABORTED
            stop_step = step
            break
        dth = theta - theta0
        dinf = float(np.abs(dth).max()) if p else 0.0
        d2 = float(np.linalg.norm(dth))
        converging = conv_threshold >= 0.0 and err < conv_threshold
        if step % record_stride == 0 or step == max_steps - 1 or converging:
            rec_steps[n_rec] = step
            rec_loss[n_rec] = loss
            rec_err[n_rec] = err
            rec_dinf[n_rec] = dinf
            rec_d2[n_rec] = d2
            n_rec += 1
        if snap_i < len(theta_snap_steps) and step == theta_snap_steps[snap_i]:
            theta_snaps[snap_i] = theta
            snap_i += 1
        if err < best_err:
            best_err = err
        if converging:
            status = STATUS_CONVERGED
            stop_step = step
            break
        jmat = np.outer(mpsi, psi.conj())
        jmat = jmat - jmat.conj().T
        b = jmat
        grad = np.empty(p)
        for j in range(p - 1, -1, -1):
            b = tmat[j].conj().T @ b @ tmat[j]
            grad[j] = -np.sum(b.T * hmat[gen_of[j]]).imag
        if noise.shape[0]:
            grad = grad + noise[step]
        theta = theta - eta * grad
    return (
        rec_steps[:n_rec],
        rec_loss[:n_rec],
        rec_err[:n_rec],
        rec_dinf[:n_rec],
        rec_d2[:n_rec],
        theta_snaps[:snap_i],
        theta,
        stop_step,
        best_err,
        status,
    )


def _build_numba():
    from numba import njit

    @njit(cache=True, nogil=True)
    def _train_loop_nb(
        av,
        vh,
        lam,
        hmat,
        gen_of,
        m,
        psi0,
        gspace,
        theta0,
        eta,
        max_steps,
        conv_threshold,
        noise,
        record_stride,
        theta_snap_steps,
    ):
        p = av.shape[0]
        d = av.shape[1]
        ngs = gspace.shape[1]
        n_rec_cap = max_steps // record_stride + 3
        rec_steps = np.zeros(n_rec_cap, dtype=np.int64)
        rec_loss = np.zeros(n_rec_cap)
        rec_err = np.zeros(n_rec_cap)
        rec_dinf = np.zeros(n_rec_cap)
        rec_d2 = np.zeros(n_rec_cap)
        theta_snaps = np.zeros((len(theta_snap_steps), p))
        theta = theta0.copy()
        tmat = np.zeros((p, d, d), dtype=np.complex128)
        scaled = np.zeros((d, d), dtype=np.complex128)
        tc = np.zeros((d, d), dtype=np.complex128)
        grad = np.zeros(p)
        n_rec = 0
        snap_i = 0
        best_err = np.inf
        status = STATUS_BUDGET
        stop_step = max_steps
        for step in range(max_steps):
            psi = psi0.copy()
            for j in range(p):
                g = gen_of[j]
                for a in range(d):
                    ph = np.exp(-1j * theta[j] * lam[g, a])
                    for b_ in range(d):
                        scaled[b_, a] = av[j, b_, a] * ph
                tmat[j] = np.dot(scaled, vh[g])
                psi = np.dot(tmat[j], psi)
            mpsi = np.dot(m, psi)
            loss = 0.0
            for a in range(d):
                loss += (np.conj(psi[a]) * mpsi[a]).real
            h = 0.0
            for c in range(ngs):
                acc = 0.0 + 0.0j
                for a in range(d):
                    acc += np.conj(gspace[a, c]) * psi[a]
                h += (acc * np.conj(acc)).real
            err = 1.0 - h
            if not (np.isfinite(loss) and np.isfinite(err)):
                status = STATUS_ABORTED
                stop_step = step
                break
            dinf = 0.0
            d2 = 0.0
            for j in range(p):
                dv = abs(theta[j] - theta0[j])
                if dv > dinf:
                    dinf = dv
                d2 += dv * dv
            d2 = np.sqrt(d2)
            converging = conv_threshold >= 0.0 and err < conv_threshold
            if step % record_stride == 0 or step == max_steps - 1 or converging:
                rec_steps[n_rec] = step
                rec_loss[n_rec] = loss
                rec_err[n_rec] = err
                rec_dinf[n_rec] = dinf
                rec_d2[n_rec] = d2
                n_rec += 1
            if snap_i < len(theta_snap_steps) and step == theta_snap_steps[snap_i]:
                for j in range(p):
                    theta_snaps[snap_i, j] = theta[j]
                snap_i += 1
            if err < best_err:
                best_err = err
            if converging:
                status = STATUS_CONVERGED
                stop_step = step
                break
            b = np.outer(mpsi, np.conj(psi))
            for a in range(d):
                for b_ in range(a, d):
                    v = b[a, b_] - np.conj(b[b_, a])
                    b[a, b_] = v
                    b[b_, a] = -np.conj(v)
            for j in range(p - 1, -1, -1):
                g = gen_of[j]
                for a in range(d):
                    for b_ in range(d):
                        tc[a, b_] = np.conj(tmat[j, b_, a])
                b = np.dot(np.dot(tc, b), tmat[j])
                s = 0.0
                for a in range(d):
                    for b_ in range(d):
                        s += (b[a, b_] * hmat[g, b_, a]).imag
                grad[j] = -s
            if noise.shape[0] > 0:
                for j in range(p):
                    theta[j] = theta[j] - eta * (grad[j] + noise[step, j])
            else:
                for j in range(p):
                    theta[j] = theta[j] - eta * grad[j]
        return (
            rec_steps[:n_rec],
            rec_loss[:n_rec],
            rec_err[:n_rec],
            rec_dinf[:n_rec],
            rec_d2[:n_rec],
            theta_snaps[:snap_i],
            theta,
            stop_step,
            best_err,
            status,
        )

    return _train_loop_nb


_NUMBA_LOOP = None
_NUMBA_FAILED = False


def train_loop(*args, backend: str | None = None):
    """Dispatch to the numba kernel, falling back to numpy.

    backend: "numba", "numpy", or None for auto (honors VQESIM_BACKEND).
    """
    global _NUMBA_LOOP, _NUMBA_FAILED
    if backend is None:
        backend = os.environ.get("VQESIM_BACKEND", "auto")
    if backend == "numpy":
        return _train_loop_py(*args)
    if _NUMBA_LOOP is None and not _NUMBA_FAILED:
        try:
            _NUMBA_LOOP = _build_numba()
        except ImportError:
            _NUMBA_FAILED = True
    if _NUMBA_LOOP is None:
        if backend == "numba":
            raise RuntimeError("numba backend requested but numba is unavailable")
        return _train_loop_py(*args)
    return _NUMBA_LOOP(*args)
