"""
Reusable preconditioners.

A new system matrix A_new inherits the preconditioner of A_prev through an
update factor Q minimising ||A_prev - A_new Q||_f, so that A_new Q P_prev
mimics A_prev P_prev. Factors are stacked into a chain that is only ever
applied through sequential matrix-vector products.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from reusemor.core.errors import DimensionMismatch, SolverError
from reusemor.core.timing import stopwatch
from reusemor.linalg.sparse import as_csr, frobenius_distance, frobenius_norm, identity, identity_distance
from reusemor.linalg.spai import SpaiResult, fit_columns, initial_patterns, spai_build
from reusemor.models.common import Direction, PrecondKind, PrecondMode, ReuseStrategy
from reusemor.models.mor import ReuseSettings
from reusemor.models.solver import SpaiConfig, update_spai_config


logger = logging.getLogger(__name__)

Index = tuple[int, int]


@dataclass(frozen=True)
class UpdateFactor:
    q: sp.csr_matrix
    direction: Direction
    from_index: Index
    to_index: Index
    # ||A_prev - A_new Q||_f at the computed Q
    min_residual: float
    build_seconds: float = 0.0
    fallback_columns: int = 0


@dataclass(frozen=True)
class PrecondChain:
    base: sp.csr_matrix
    # oldest first; applied after the base in this order
    updates: tuple[UpdateFactor, ...] = ()
    total_build_seconds: float = 0.0

    @property
    def n(self) -> int:
        return self.base.shape[0]

    def __len__(self) -> int:
        return len(self.updates)

    def apply(self, x) -> np.ndarray:
        return chain_apply(self, x)

    def as_operator(self) -> LinearOperator:
        return LinearOperator((self.n, self.n), matvec=self.apply, dtype=np.float64)

    def explicit(self) -> sp.csr_matrix:
        """Product of all factors; diagnostics only."""
        P = self.base
        for f in self.updates:
            P = f.q @ P
        return as_csr(P)


def _square_pair(A_prev: sp.spmatrix, A_new: sp.spmatrix) -> None:
    if A_prev.shape != A_new.shape or A_new.shape[0] != A_new.shape[1]:
        raise DimensionMismatch(f"update needs square matrices of equal size, got {A_prev.shape} and {A_new.shape}")


def update_build(
    A_prev: sp.spmatrix,
    A_new: sp.spmatrix,
    cfg: SpaiConfig | None = None,
    *,
    direction: Direction = Direction.HORIZONTAL,
    from_index: Index = (0, 0),
    to_index: Index = (0, 0),
    threads: int = 1,
    patterns: list[np.ndarray] | None = None,
) -> UpdateFactor:
    """
    Q = argmin ||A_prev - A_new Q||_f, column by column, starting from the
    pattern of A_new plus the diagonal (so Q = I is always feasible) and
    augmented like a fresh SPAI.
    """
    A_prev = as_csr(A_prev)
    A_new = as_csr(A_new)
    _square_pair(A_prev, A_new)
    cfg = cfg or SpaiConfig()
    pats = patterns if patterns is not None else initial_patterns(A_new, cfg)
    fit: SpaiResult = fit_columns(A_new, cfg, rhs=A_prev, patterns=pats, threads=threads)
    return UpdateFactor(
        q=fit.p,
        direction=direction,
        from_index=from_index,
        to_index=to_index,
        min_residual=fit.frobenius_residual,
        build_seconds=fit.build_seconds,
        fallback_columns=len(fit.fallback_columns),
    )


def chain_extend(chain: PrecondChain, f: UpdateFactor) -> PrecondChain:
    if f.q.shape != (chain.n, chain.n):
        raise DimensionMismatch(f"factor {f.q.shape} does not conform to chain of size {chain.n}")
    return PrecondChain(
        base=chain.base,
        updates=chain.updates + (f,),
        total_build_seconds=chain.total_build_seconds + f.build_seconds,
    )


def chain_apply(chain: PrecondChain, x) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != chain.n:
        raise DimensionMismatch(f"chain_apply: expected length {chain.n}, got shape {v.shape}")
    y = chain.base @ v
    for f in chain.updates:
        y = f.q @ y
    return np.asarray(y, dtype=np.float64).ravel()


def closed_form_update_qb(A_prev_inv_D_action, sigma_prev: float, sigma_new: float, *, n: int | None = None) -> LinearOperator:
    """
    Q = (I + (sigma_new - sigma_prev) A_prev^{-1} D)^{-1} for shifted pencils
    A(sigma) = sigma D - K. Dense validation oracle for small n.

    A_prev_inv_D_action may be a dense/sparse matrix, a LinearOperator, or a
    callable (then `n` is required).
    """
    G = A_prev_inv_D_action
    if callable(G) and not isinstance(G, LinearOperator) and not hasattr(G, "shape"):
        if n is None:
            raise DimensionMismatch("n is required when the action is a plain callable")
        G_dense = np.column_stack([np.asarray(G(e)).ravel() for e in np.eye(n)])
    elif isinstance(G, LinearOperator):
        G_dense = G @ np.eye(G.shape[1])
    else:
        G_dense = G.toarray() if sp.issparse(G) else np.asarray(G, dtype=np.float64)
    size = G_dense.shape[0]
    delta = float(sigma_new) - float(sigma_prev)
    if delta == 0.0:
        return LinearOperator((size, size), matvec=lambda v: np.asarray(v, dtype=np.float64).ravel(), dtype=np.float64)
    T = np.eye(size) + delta * G_dense
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.linalg.cond(T)
    if not cond <= 1.0 / np.finfo(float).eps:
        raise SolverError(f"I + {delta:g} A^-1 D is singular; no closed-form update between {sigma_prev:g} and {sigma_new:g}")
    Q = np.linalg.inv(T)
    return LinearOperator((size, size), matvec=lambda v: Q @ np.asarray(v, dtype=np.float64).ravel(), dtype=np.float64)


@dataclass
class PrecondEvent:
    """A preconditioner obtained for one system matrix, with its ledger data."""

    chain: PrecondChain | None
    kind: PrecondKind
    build_seconds: float = 0.0
    min_residual: float = math.nan
    change_ratio: float = math.nan
    standard_ratio: float = math.nan
    precond_residual: float = math.nan
    fallback_columns: int = 0

    def operator(self):
        return None if self.chain is None else self.chain.apply

    @property
    def chain_length(self) -> int:
        return 0 if self.chain is None else len(self.chain)


@dataclass
class PreconditionerFactory:
    """
    Produces preconditioners for a sequence of system matrices.

    mode NONE   -> identity, FRESH -> SPAI per matrix, REUSE -> update factors
    on top of an earlier chain (SEQUENTIAL: the caller's predecessor;
    ANCHORED: the first SPAI of the run). A chain longer than max_chain_len is
    replaced by a fresh SPAI.
    """

    mode: PrecondMode
    settings: ReuseSettings = field(default_factory=ReuseSettings)
    _anchor: tuple[PrecondChain, sp.csr_matrix] | None = field(default=None, init=False, repr=False)
    fresh_builds: int = field(default=0, init=False)
    update_builds: int = field(default=0, init=False)

    @property
    def update_config(self) -> SpaiConfig:
        return update_spai_config(self.settings.spai, self.settings.update_sweeps)

    def _diagnostics(self, event: PrecondEvent, A: sp.csr_matrix) -> PrecondEvent:
        event.standard_ratio = identity_distance(A)
        if event.chain is not None and A.shape[0] <= self.settings.diagnostics_max_n:
            n = A.shape[0]
            event.precond_residual = frobenius_distance(identity(n), A @ event.chain.explicit()) / math.sqrt(n)
        return event

    def fresh(self, A: sp.spmatrix) -> PrecondEvent:
        A = as_csr(A)
        if self.mode is PrecondMode.NONE:
            return self._diagnostics(PrecondEvent(chain=None, kind=PrecondKind.NONE), A)
        with stopwatch() as sw:
            res = spai_build(A, self.settings.spai, threads=self.settings.threads)
        chain = PrecondChain(base=res.p, total_build_seconds=sw.seconds)
        self._anchor = (chain, A)
        self.fresh_builds += 1
        logger.debug(f"fresh SPAI n={A.shape[0]} nnz={res.p.nnz} in {sw.seconds:.3f}s")
        event = PrecondEvent(
            chain=chain,
            kind=PrecondKind.FRESH,
            build_seconds=sw.seconds,
            fallback_columns=len(res.fallback_columns),
        )
        return self._diagnostics(event, A)

    def next(
        self,
        A_new: sp.spmatrix,
        *,
        prev_chain: PrecondChain | None,
        A_prev: sp.spmatrix | None,
        direction: Direction,
        from_index: Index = (0, 0),
        to_index: Index = (0, 0),
    ) -> PrecondEvent:
        """Preconditioner for A_new given the chain that served A_prev."""
        A_new = as_csr(A_new)
        if self.mode is not PrecondMode.REUSE or prev_chain is None or A_prev is None:
            return self.fresh(A_new)
        if self.settings.strategy is ReuseStrategy.ANCHORED and self._anchor is not None:
            prev_chain, A_prev = self._anchor
        A_prev = as_csr(A_prev)
        if len(prev_chain) >= self.settings.max_chain_len:
            logger.info(f"chain reached {len(prev_chain)} factors; rebuilding SPAI at {to_index}")
            return self.fresh(A_new)
        with stopwatch() as sw:
            f = update_build(
                A_prev,
                A_new,
                self.update_config,
                direction=direction,
                from_index=from_index,
                to_index=to_index,
                threads=self.settings.threads,
            )
        self.update_builds += 1
        prev_norm = frobenius_norm(A_prev)
        change = frobenius_distance(A_prev, A_new) / prev_norm if prev_norm > 0 else math.nan
        kind = PrecondKind.HORIZONTAL if direction is Direction.HORIZONTAL else PrecondKind.VERTICAL
        logger.debug(f"{kind.value} update {from_index}->{to_index}: min residual {f.min_residual:.3e}, change {change:.3e}")
        event = PrecondEvent(
            chain=chain_extend(prev_chain, f),
            kind=kind,
            build_seconds=sw.seconds,
            min_residual=f.min_residual,
            change_ratio=change,
            fallback_columns=f.fallback_columns,
        )
        return self._diagnostics(event, A_new)
