"""Numerical tolerances and size caps, overridable through the environment.

``DDTN_EPS_NUM``  numeric tolerance for weights and cross-checks (default 1e-10)
``DDTN_EPS_EQ``   fidelity tolerance of equivalence verdicts (default 1e-9)
``DDTN_N_DENSE``  largest register converted to a dense vector (default 20)
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace

EPS_NUM = 1e-10
EPS_EQ = 1e-9
N_DENSE = 20


@dataclass(frozen=True)
class Tolerances:
    eps_num: float = EPS_NUM
    eps_eq: float = EPS_EQ
    n_dense: int = N_DENSE

    @classmethod
    def from_env(cls, environ=None) -> "Tolerances":
        env = os.environ if environ is None else environ
        return cls(
            eps_num=float(env.get("DDTN_EPS_NUM", EPS_NUM)),
            eps_eq=float(env.get("DDTN_EPS_EQ", EPS_EQ)),
            n_dense=int(env.get("DDTN_N_DENSE", N_DENSE)),
        )

    def override(self, **kwargs) -> "Tolerances":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


def defaults() -> Tolerances:
    return Tolerances.from_env()
