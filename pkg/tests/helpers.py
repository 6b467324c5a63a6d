"""Random model generators and independent brute-force oracles for the tests.

The oracles deliberately avoid the package's own shortcuts: class operators
are multiplied out one factor at a time with explicit Schrodinger-picture
evolution from ``scipy.linalg.expm``, traces are taken literally, and path
sums loop over every ordered pair of paths.
"""

import itertools

import numpy as np
import scipy.linalg

from gqm.hilbert import DensityState, Hamiltonian, ProjectionFamily
from gqm.histories import HistoryGrid

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


def ket_bra(v):
    return np.outer(v, np.conj(v))


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_groups(rng, d, k=None):
    """Split range(d) into k nonempty groups."""
    k = int(rng.integers(1, d + 1)) if k is None else k
    perm = rng.permutation(d)
    cuts = sorted(rng.choice(np.arange(1, d), size=k - 1, replace=False)) if k > 1 else []
    return [sorted(g.tolist()) for g in np.split(perm, cuts)]


def random_family(rng, d, k=None):
    return ProjectionFamily.from_basis(random_unitary(rng, d), groups=random_groups(rng, d, k))


def random_grid(rng, d=None, n=None, rho=None, max_histories=None):
    d = int(rng.integers(2, 7)) if d is None else d
    n = int(rng.integers(1, 4)) if n is None else n
    times = np.cumsum(rng.uniform(0.1, 1.5, size=n))
    fams = [random_family(rng, d) for _ in range(n)]
    h = Hamiltonian(random_hermitian(rng, d))
    rho = random_density(rng, d) if rho is None else rho
    return HistoryGrid(times, fams, h, DensityState(rho))


def random_map(rng, labels):
    k = int(rng.integers(1, len(labels) + 1))
    return {lab: int(rng.integers(0, k)) for lab in labels}


# Oracles -----------------------------------------------------------------

def oracle_class_operator(grid, alpha):
    """Schrodinger-picture product U(t_n)^+ P_n U(t_n - t_{n-1}) ... P_1 U(t_1)."""
    h = grid.hamiltonian.matrix
    out = np.eye(grid.dimension, dtype=complex)
    prev = 0.0
    for t, fam, a in zip(grid.times, grid.families, alpha):
        out = fam[a].matrix @ scipy.linalg.expm(-1j * h * (t - prev)) @ out
        prev = t
    return scipy.linalg.expm(1j * h * prev) @ out


def oracle_D(grid):
    labels = list(itertools.product(*(range(len(f)) for f in grid.families)))
    ops = [oracle_class_operator(grid, a) for a in labels]
    rho = grid.state.matrix
    n = len(labels)
    d = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            d[i, j] = np.trace(ops[i] @ rho @ ops[j].conj().T)
    return labels, d


def oracle_D_pathsum(model, classify):
    """Literal double sum over ordered pairs of paths."""
    k = model.propagator
    rho = model.initial_state.matrix
    paths = list(itertools.product(range(model.sites), repeat=model.slice_count + 1))

    def amp(p):
        a = 1.0 + 0j
        for x, y in zip(p, p[1:]):
            a *= k[y, x]
        return a

    amps = {p: amp(p) for p in paths}
    labels = []
    for p in paths:
        lab = classify(p)
        if lab not in labels:
            labels.append(lab)
    pos = {lab: i for i, lab in enumerate(labels)}
    d = np.zeros((len(labels), len(labels)), dtype=complex)
    for q in paths:
        for qp in paths:
            if q[-1] != qp[-1]:
                continue
            d[pos[classify(q)], pos[classify(qp)]] += (
                amps[q] * np.conj(amps[qp]) * rho[q[0], qp[0]]
            )
    return labels, d
