"""Independent reference implementations used as test oracles.

Nothing here imports the package under test. Operators are built as full
``2**n`` matrices with Kronecker products, which is slow but obviously correct.
"""

from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def expm_pauli(theta, pauli):
    """exp(-i theta P / 2) for an involutory P."""
    return np.cos(theta / 2) * np.eye(pauli.shape[0]) - 1j * np.sin(theta / 2) * pauli


def embed(op, target, n):
    """Single-qubit ``op`` on ``target`` (qubit 0 = most significant bit)."""
    mats = [op if q == target else I2 for q in range(n)]
    return reduce(np.kron, mats)


def embed_pair(pa, pb, a, b, n):
    mats = [pa if q == a else pb if q == b else I2 for q in range(n)]
    return reduce(np.kron, mats)


def zz_observable(n):
    return reduce(np.kron, [Z] * n)


def kraus_ad(g):
    return [np.array([[1, 0], [0, np.sqrt(1 - g)]], complex), np.array([[0, np.sqrt(g)], [0, 0]], complex)]


def kraus_pd(g):
    return [np.array([[1, 0], [0, np.sqrt(1 - g)]], complex), np.array([[0, 0], [0, np.sqrt(g)]], complex)]


def kraus_dp(g):
    return [np.sqrt(1 - g) * I2, np.sqrt(g / 3) * Z, np.sqrt(g / 3) * X, np.sqrt(g / 3) * Y]


KRAUS = {"ad": kraus_ad, "pd": kraus_pd, "dp": kraus_dp}


def channel_full(rho, ops, target, n):
    out = np.zeros_like(rho)
    for e in ops:
        big = embed(e, target, n)
        out += big @ rho @ big.conj().T
    return out


def circuit_ops(n_layers, x, params, n=4):
    """Gate sequence of the ansatz as ``(full_unitary, touched_qubits, is_encoding)``."""
    ops = []
    p = 0
    for _ in range(n_layers):
        ops.append((embed(expm_pauli(x[0], X), 0, n), (0,), True))
        ops.append((embed(expm_pauli(x[1], X), 2, n), (2,), True))
        for q in range(n):
            ops.append((embed(expm_pauli(params[p], Y), q, n), (q,), False))
            p += 1
        for q in range(n):
            a, b = q, (q + 1) % n
            xx = embed_pair(X, X, a, b, n)
            ops.append((expm_pauli(params[p], xx), (a, b), False))
            p += 1
    return ops


def density_forward(n_layers, x, params, channel=None, gamma=0.0, noise_after_encoding=True, n=4):
    rho = np.zeros((2**n, 2**n), complex)
    rho[0, 0] = 1
    ops = KRAUS[channel](gamma) if channel else None
    for u, touched, enc in circuit_ops(n_layers, x, params, n):
        rho = u @ rho @ u.conj().T
        if ops is not None and (noise_after_encoding or not enc):
            for q in touched:
                rho = channel_full(rho, ops, q, n)
    return float(np.real(np.trace(zz_observable(n) @ rho)))


def statevector_forward(n_layers, x, params, n=4):
    psi = np.zeros(2**n, complex)
    psi[0] = 1
    for u, _, _ in circuit_ops(n_layers, x, params, n):
        psi = u @ psi
    return float(np.real(psi.conj() @ zz_observable(n) @ psi))


def random_state(n, rng):
    """Random full-rank density matrix (Ginibre)."""
    g = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def scalar_adam(grads_sequence, theta0, lr=0.03, b1=0.9, b2=0.999, eps=1e-8):
    """Plain-Python Adam on one scalar parameter, written out loop by loop."""
    theta, m, v = float(theta0), 0.0, 0.0
    for t, g in enumerate(grads_sequence, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1**t)
        vh = v / (1 - b2**t)
        theta = theta - lr * mh / (vh**0.5 + eps)
    return theta
