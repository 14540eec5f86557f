"""Numerical tolerances shared across the package."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

__all__ = ["Tolerances", "DEFAULT_TOL"]


@dataclass(frozen=True)
class Tolerances:
    """Relative tolerances; each is multiplied by the scale named in its comment."""

    cluster: float = 1e-7        # x (1 + ||M||_F): eigenvalue clustering
    inv: float = 1e-10           # x N ||A_j||_F: singularity test in make_tuple
    reg: float = 1e-8            # x gradient scale: regularity on coordinate lines
    eq: float = 1e-8             # x sqrt(N): pairwise projection equality
    const: float = 1e-6          # absolute: constancy-probe threshold
    inv_residual: float = 1e-8   # x max ||A_j||: invariance residual
    psd: float = 1e-8            # x ||P P*||: positive eigenvalues of P P*
    poly: float = 1e-9           # x max |coef|: float polynomial identities
    trace: float = 1e-6          # x sample scale: trace certificate in decompose

    def with_(self, **kw) -> "Tolerances":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOL = Tolerances()
