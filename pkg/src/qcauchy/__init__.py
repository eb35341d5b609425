"""Quantum Cauchy functionals: position-space fundamental solutions of the
free Dirac and Maxwell equations evaluated on bump test functions, with
momentum-space oracles for every identity they satisfy."""

__version__ = "0.1.0"

from .functionals import (  # noqa: E402
    FunctionalKind,
    FunctionalValue,
    conjugate_apply,
    evaluate,
    momentum_pairing,
    qc1d_apply,
    qc1d_massive_apply,
    qc3d_apply,
    qc3d_massive_apply,
)
from .quad import IntegralResult, QuadratureConfig  # noqa: E402
from .testfn import BumpFunction  # noqa: E402

__all__ = [
    "__version__",
    "BumpFunction",
    "FunctionalKind",
    "FunctionalValue",
    "IntegralResult",
    "QuadratureConfig",
    "conjugate_apply",
    "evaluate",
    "momentum_pairing",
    "qc1d_apply",
    "qc1d_massive_apply",
    "qc3d_apply",
    "qc3d_massive_apply",
]
