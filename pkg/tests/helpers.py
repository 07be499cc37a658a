"""Shared generators for the test suite.

Everything here is seeded and deterministic. The conservative model
generator mirrors how the optimizer builds feasible interactions (commutant
exponential map), since that is the only way to get exactly conservative
unitaries; oracle values in the tests themselves are computed independently.
"""

import numpy as np

import waylimit as w

# Hand-built two-qubit gates used as oracles, basis order
# (up,up), (up,down), (down,up), (down,down) with the probe index fastest.
SWAP_MATRIX = np.array([
    [1, 0, 0, 0],
    [0, 0, 1, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
], dtype=complex)

CNOT_Z_CONTROL_X_FLIP = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
], dtype=complex)


def random_conservative_model(rng, object_dim=None, probe_dim=None,
                              spin_scenario=None, probe_ladder=None):
    """Draw (model, pair) with U from the commutant map and [M, L2] = 0.

    Half the probe draws use the spin-j ladder spectrum in a random basis so
    the total conserved quantity has genuinely degenerate sectors; half the
    two-level-object draws use the spin scenario (A = S_x, L1 = S_z).
    """
    od = object_dim if object_dim else int(rng.integers(2, 5))
    pd = probe_dim if probe_dim else int(rng.integers(2, 9))
    spin = spin_scenario if spin_scenario is not None \
        else (od == 2 and rng.random() < 0.5)
    if spin:
        od = 2
        sx, _, sz = w.spin_operators()
        a, l1 = sx, sz
    else:
        a = w.random_hermitian(od, rng)
        l1 = w.random_hermitian(od, rng)

    ladder = probe_ladder if probe_ladder is not None else (rng.random() < 0.5)
    if ladder:
        vals = (pd - 1) / 2.0 - np.arange(pd)
    else:
        vals = rng.uniform(-1.0, 1.0, size=pd)
    vbasis = w.random_unitary(pd, rng).matrix
    l2 = w.Operator.hermitian((vbasis * vals) @ vbasis.conj().T)

    com_l2 = w.commutant_basis(l2)
    coeff = rng.standard_normal(com_l2.size)
    m_mat = sum(c * g.matrix for c, g in zip(coeff, com_l2.generators))
    m = w.Operator.hermitian((m_mat + m_mat.conj().T) / 2.0)

    pair = w.ConservationPair(L1=l1, L2=l2)
    basis = w.commutant_basis(pair.total())
    theta = rng.uniform(-np.pi, np.pi, size=basis.size)
    u = w.conservative_unitary(basis, theta)
    xi = w.random_ket(pd, rng)
    return w.MeasurementModel(od, pd, xi, u, m, a), pair


def _partial_map(u_matrix, object_bra, object_ket, probe_dim):
    """Probe-space map xi -> (<object_bra| x I) U (|object_ket> x xi)."""
    t = u_matrix.reshape(2, probe_dim, 2, probe_dim)
    return np.einsum("i,ipjq,j->pq", object_bra.conj(), t, object_ket)


def conservative_yw_embedding(rng, probe_values, attempts=40):
    """Partial-interaction data realized by an actual conservative model.

    probe_values is the (diagonal) spectrum of the probe conserved quantity;
    adjacent distinct values must differ by 1 so the total conserved quantity
    has mixing sectors. The probe state is solved numerically so that, inside
    every eigenvalue cluster of L2, the pointer components of the two input
    images are orthogonal; the record observable is then assembled from those
    components, which makes it commute with L2 exactly and gives the eigenstate
    conditions by construction.

    Returns (yw, model, pair, variance) or None when no solution was found.
    """
    from scipy.optimize import least_squares

    d = len(probe_values)
    l2 = w.Operator.hermitian(np.diag(np.asarray(probe_values, dtype=float)))
    sx, _, sz = w.spin_operators()
    pair = w.ConservationPair(L1=sz, L2=l2)
    basis = w.commutant_basis(pair.total())

    ax = np.array([1.0, 1.0]) / np.sqrt(2.0)
    bx = np.array([1.0, -1.0]) / np.sqrt(2.0)

    clusters = []
    sorted_vals = np.asarray(probe_values, dtype=float)
    for value in np.unique(np.round(sorted_vals, 9)):
        clusters.append(np.where(np.abs(sorted_vals - value) < 1e-9)[0])

    for _ in range(attempts):
        theta = rng.uniform(-np.pi, np.pi, size=basis.size)
        u = w.conservative_unitary(basis, theta)
        k_plus = _partial_map(u.matrix, ax, ax, d)
        k_minus = _partial_map(u.matrix, bx, bx, d)
        quads = []
        for idx in clusters:
            q = np.zeros((d, d))
            q[idx, idx] = 1.0
            quads.append(k_plus.conj().T @ q @ k_minus)

        def residuals(x):
            xi = x[:d] + 1j * x[d:]
            out = [np.real(np.vdot(xi, xi)) - 1.0]
            for q in quads:
                g = complex(xi.conj() @ (q @ xi))
                out.extend([g.real, g.imag])
            return np.array(out)

        x0 = rng.standard_normal(2 * d)
        x0 /= np.linalg.norm(x0)
        sol = least_squares(residuals, x0, xtol=3e-16, ftol=3e-16, gtol=3e-16)
        if np.max(np.abs(residuals(sol.x))) > 1e-13:
            continue
        xi_vec = sol.x[:d] + 1j * sol.x[d:]
        xi_vec /= np.linalg.norm(xi_vec)

        v1 = u.matrix @ np.kron(ax, xi_vec)
        v2 = u.matrix @ np.kron(bx, xi_vec)
        xi_plus = np.einsum("i,ip->p", ax.conj(), v1.reshape(2, d))
        eta_plus = np.einsum("i,ip->p", bx.conj(), v1.reshape(2, d))
        xi_minus = np.einsum("i,ip->p", bx.conj(), v2.reshape(2, d))
        eta_minus = np.einsum("i,ip->p", ax.conj(), v2.reshape(2, d))

        # Assemble the record observable cluster by cluster and clean the
        # rounding-level overlap out of the minus pointer.
        m = np.zeros((d, d), dtype=complex)
        ok = True
        for idx in clusters:
            up = np.zeros(d, dtype=complex)
            up[idx] = xi_plus[idx]
            dn = np.zeros(d, dtype=complex)
            dn[idx] = xi_minus[idx]
            nu, nd = np.linalg.norm(up), np.linalg.norm(dn)
            if nu > 1e-11 and nu < 1e-3:
                ok = False
                break
            if nd > 1e-11 and nd < 1e-3:
                ok = False
                break
            if nu > 1e-11:
                uhat = up / nu
                m += 0.5 * np.outer(uhat, uhat.conj())
                if nd > 1e-11:
                    dn = dn - uhat * np.vdot(uhat, dn)
                    xi_minus[idx] = dn[idx]
                    nd = np.linalg.norm(dn)
            if nd > 1e-11:
                dhat = dn / nd
                m -= 0.5 * np.outer(dhat, dhat.conj())
        if not ok:
            continue

        yw = w.YWModel(
            probe_dim=d,
            xi=w.Ket(xi_vec),
            xi_plus=w.Ket(xi_plus, normalized=False),
            xi_minus=w.Ket(xi_minus, normalized=False),
            eta_plus=w.Ket(eta_plus, normalized=False),
            eta_minus=w.Ket(eta_minus, normalized=False),
            M=w.Operator.hermitian(m),
        )
        model = w.MeasurementModel(2, d, w.Ket(xi_vec), u,
                                   w.Operator.hermitian(m), sx)
        return yw, model, pair, w.variance(l2, w.Ket(xi_vec))
    return None
