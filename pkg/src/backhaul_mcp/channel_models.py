"""Finite-N channel transfer matrices for the circular Wyner and soft-handoff models.

Row j of H is cell-site j.  Its nonzero K-wide blocks sit at the users of cell j
(coefficients ``a_j``), of cell j-1 (``alpha * b_j``) and, for the Wyner model only,
of cell j+1 (``alpha * c_j``), all indices taken mod N.

The Gram matrix H H^H is banded-circulant; ``gram`` builds it from per-cell inner
products in O(N K) instead of forming the dense N x NK product.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .params import Channel, Model, StructureError, SystemParams, ValidationError

_MIN_CELLS = {Model.WYNER: 3, Model.SOFT_HANDOFF: 2}


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Coefficient arrays of one channel realization, each of shape (N, K)."""

    model: Model
    alpha: float
    a: np.ndarray
    b: np.ndarray
    c: Optional[np.ndarray] = None

    @property
    def n_cells(self) -> int:
        return self.a.shape[0]

    @property
    def k_users(self) -> int:
        return self.a.shape[1]

    @property
    def entries(self) -> np.ndarray:
        """Dense N x NK transfer matrix."""
        n, k = self.a.shape
        h = np.zeros((n, n * k), dtype=complex)
        for j in range(n):
            h[j, j * k:(j + 1) * k] += self.a[j]
            left = (j - 1) % n
            h[j, left * k:(left + 1) * k] += self.alpha * self.b[j]
            if self.c is not None:
                right = (j + 1) % n
                h[j, right * k:(right + 1) * k] += self.alpha * self.c[j]
        return h

    def gram(self) -> np.ndarray:
        """H H^H (N x N, Hermitian)."""
        c = None if self.c is None else self.c[None]
        return banded_gram(self.model, self.alpha, self.a[None], self.b[None], c)[0]


def banded_gram(model, alpha, a, b, c=None):
    """Batched H H^H from coefficient stacks of shape (T, N, K)."""
    t, n, _ = a.shape
    rows = np.arange(n)
    g = np.zeros((t, n, n), dtype=complex)

    def dot(u, v):
        return np.einsum("tnk,tnk->tn", u, v.conj())

    def put(offset, vals):
        # (row, col) pairs are distinct within each statement, so plain += is safe
        cols = (rows + offset) % n
        g[:, rows, cols] += vals
        g[:, cols, rows] += vals.conj()

    diag = np.sum(np.abs(a) ** 2, axis=2) + alpha**2 * np.sum(np.abs(b) ** 2, axis=2)
    b_next = np.roll(b, -1, axis=1)
    if model is Model.WYNER:
        diag = diag + alpha**2 * np.sum(np.abs(c) ** 2, axis=2)
        a_next = np.roll(a, -1, axis=1)
        put(1, alpha * (dot(a, b_next) + dot(c, a_next)))
        put(2, alpha**2 * dot(c, np.roll(b, -2, axis=1)))
    else:
        put(1, alpha * dot(a, b_next))
    g[:, rows, rows] += diag
    return g


def draw_coefficients(model, channel, n_cells, k_users, rng):
    """(a, b, c) arrays for one realization; c is None for the soft-handoff model."""
    shape = (n_cells, k_users)
    n_arrays = 3 if model is Model.WYNER else 2
    if channel is Channel.GAUSSIAN:
        arrays = [np.ones(shape, dtype=complex) for _ in range(n_arrays)]
    else:
        arrays = []
        for _ in range(n_arrays):
            g = rng.standard_normal((2,) + shape)
            arrays.append((g[0] + 1j * g[1]) / np.sqrt(2.0))
    if n_arrays == 2:
        arrays.append(None)
    return tuple(arrays)


def _check_size(model, n_cells):
    if n_cells < _MIN_CELLS[model]:
        raise StructureError(
            f"{model.value} model needs at least {_MIN_CELLS[model]} cells, got {n_cells}")


def build_matrix(params: SystemParams, n_cells: int, seed=None) -> ChannelMatrix:
    """Draw one realization of H for ``params``.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.  Under TDMA
    the matrix has one user per cell.
    """
    _check_size(params.model, n_cells)
    if params.large_k:
        raise ValidationError("cannot build a finite matrix with infinitely many users")
    rng = np.random.default_rng(seed)
    a, b, c = draw_coefficients(params.model, params.channel, n_cells, int(params.k_eff), rng)
    return ChannelMatrix(params.model, params.alpha, a, b, c)


def gram_eigen_rate(h: ChannelMatrix, p_eff: float) -> float:
    """(1/N) log2 det(I + (p_eff/K) H H^H) in bits per channel use."""
    if p_eff < 0:
        raise ValidationError(f"p_eff must be >= 0, got {p_eff}")
    lam = np.clip(np.linalg.eigvalsh(h.gram()), 0.0, None) / h.k_users
    return float(np.sum(np.log2(1.0 + p_eff * lam)) / h.n_cells)


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    """Per-trial seed; independent of how trials are batched or parallelized."""
    return np.random.SeedSequence([seed, trial])


@functools.lru_cache(maxsize=64)
def gram_spectra(model: Model, alpha: float, k_users: int, channel: Channel,
                 n_cells: int, n_trials: int, seed: int) -> np.ndarray:
    """Eigenvalues of H H^H / K for ``n_trials`` independent realizations.

    Returns a read-only (n_trials, n_cells) array.  Trial i is drawn from
    ``trial_seed(seed, i)`` so results do not depend on the chunking below.
    """
    _check_size(model, n_cells)
    if channel is Channel.GAUSSIAN:
        n_trials_drawn = 1
    else:
        n_trials_drawn = n_trials
    chunk = max(1, min(n_trials_drawn, 2_000_000 // (n_cells * k_users * 3) or 1, 256))
    out = np.empty((n_trials_drawn, n_cells))
    for start in range(0, n_trials_drawn, chunk):
        stop = min(start + chunk, n_trials_drawn)
        coeffs = [draw_coefficients(model, channel, n_cells, k_users,
                                    np.random.default_rng(trial_seed(seed, i)))
                  for i in range(start, stop)]
        a = np.stack([x[0] for x in coeffs])
        b = np.stack([x[1] for x in coeffs])
        c = None if model is Model.SOFT_HANDOFF else np.stack([x[2] for x in coeffs])
        g = banded_gram(model, alpha, a, b, c)
        out[start:stop] = np.clip(np.linalg.eigvalsh(g), 0.0, None) / k_users
    if n_trials_drawn != n_trials:
        out = np.broadcast_to(out, (n_trials, n_cells))
    out = np.ascontiguousarray(out)
    out.setflags(write=False)
    return out
