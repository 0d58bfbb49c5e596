"""Uniform h-refinement convergence studies and their CSV / JSON reports."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .assembly import ProblemCase, assemble_load, assemble_stiffness, zero_field
from .dofs import build_dof_space
from .mesh import build_uniform_mesh
from .reference import MAX_RT_ORDER
from .solve import SparseSystem, error_norms, solve

PI = np.pi
ROUNDOFF = 1e-13
CONVERGED_TO_ROUNDOFF = "CONVERGED_TO_ROUNDOFF"
CSV_HEADER = "level,h,ndof,err_u,err_sigma,err_lambda_h1,rate_u,rate_sigma,rate_lambda_h1"
_NUM_TAG = "@num:"
CASE_ALIASES = {"i": "case_i", "ii": "case_ii", "general": "case_general"}


def _sinsin(x, y):
    return np.sin(PI * x) * np.sin(PI * y)


def _grad_sinsin(x, y):
    return PI * np.stack(
        [np.cos(PI * x) * np.sin(PI * y), np.sin(PI * x) * np.cos(PI * y)], axis=-1
    )


def _ones(x, y):
    return np.ones_like(np.asarray(x, dtype=float))


def _zero_vec(x, y):
    return np.zeros(np.shape(x) + (2,))


def _case_i() -> ProblemCase:
    # -Laplace(lam) = f + u and zeta = sigma + grad(lam) give the multiplier.
    k = (2 * PI**2 + 1) / (2 * PI**2)
    return ProblemCase(
        A=np.eye(2),
        b=np.zeros(2),
        c=0.0,
        f=lambda x, y: 2 * PI**2 * _sinsin(x, y),
        u0=zero_field,
        name="case_i",
        u_exact=_sinsin,
        sigma_exact=lambda x, y: -_grad_sinsin(x, y),
        lambda_exact=lambda x, y: k * _sinsin(x, y),
        lambda_grad_exact=lambda x, y: k * _grad_sinsin(x, y),
        zeta_exact=lambda x, y: _grad_sinsin(x, y) / (2 * PI**2),
        zeta_div_exact=lambda x, y: -_sinsin(x, y),
    )


def _case_ii() -> ProblemCase:
    return ProblemCase(
        A=np.eye(2),
        b=np.zeros(2),
        c=0.0,
        f=zero_field,
        u0=_ones,
        name="case_ii",
        u_exact=_ones,
        sigma_exact=_zero_vec,
    )


GENERAL_A = np.array([[2.0, 1.0], [1.0, 2.0]])
GENERAL_B = np.array([1.0, -1.0])
GENERAL_C = 1.0


def _general_f(x, y):
    # u = sin(pi x) sin(pi y); -div(A grad u) = -(a11 u_xx + 2 a12 u_xy + a22 u_yy)
    A, b, c = GENERAL_A, GENERAL_B, GENERAL_C
    u = _sinsin(x, y)
    uxy = PI**2 * np.cos(PI * x) * np.cos(PI * y)
    diffusion = PI**2 * (A[0, 0] + A[1, 1]) * u - 2 * A[0, 1] * uxy
    g = _grad_sinsin(x, y)
    return diffusion + b[0] * g[..., 0] + b[1] * g[..., 1] + c * u


def _case_general() -> ProblemCase:
    return ProblemCase(
        A=GENERAL_A,
        b=GENERAL_B,
        c=GENERAL_C,
        f=_general_f,
        u0=zero_field,
        name="case_general",
        u_exact=_sinsin,
        sigma_exact=lambda x, y: -_grad_sinsin(x, y) @ GENERAL_A.T,
    )


_BUILTIN = {"case_i": _case_i, "case_ii": _case_ii, "case_general": _case_general}


def builtin_case(case_id: str) -> ProblemCase:
    key = CASE_ALIASES.get(case_id, case_id)
    if key not in _BUILTIN:
        raise KeyError(f"unknown case {case_id!r}; choose from {sorted(_BUILTIN)}")
    return _BUILTIN[key]()


def compute_rates(errors, hs) -> list[float]:
    """Observed orders log(e[k-1]/e[k]) / log(h[k-1]/h[k])."""
    errors = [float(e) for e in errors]
    hs = [float(h) for h in hs]
    if len(errors) != len(hs) or len(errors) < 2:
        raise ValueError("need two or more (error, h) pairs of equal length")
    if any(e <= 0 for e in errors) or any(h <= 0 for h in hs):
        raise ValueError("errors and mesh sizes must be positive")
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("mesh sizes must be strictly decreasing")
    return [
        math.log(errors[k - 1] / errors[k]) / math.log(hs[k - 1] / hs[k])
        for k in range(1, len(errors))
    ]


def expected_bands(case_id: str, p: int) -> dict[str, tuple[float, float]]:
    """Acceptance bands for the summary rates, keyed by error quantity."""
    key = CASE_ALIASES.get(case_id, case_id)
    if key == "case_i":
        band = (p + 0.75, p + 1.3)
        return {"u": band, "lambda_h1": band}
    if key == "case_ii":
        if p == 0:
            return {"u": (0.8, 1.3), "solution": (0.8, 1.3)}
        return {"u": (1.7, 2.4), "sigma": (1.7, 2.4), "solution": (1.7, 2.4)}
    if key == "case_general" and p == 1:
        return {"u": (1.7, 2.4)}
    return {}


def default_levels(p: int) -> tuple[int, int]:
    return (1, 4) if p == 3 else (1, 5)


@dataclass(frozen=True)
class StudyConfig:
    case: str
    p: int
    levels: Optional[tuple[int, int]] = None
    quad_degree: Optional[int] = None
    output: Optional[Path] = None
    boundary_term: bool = True

    def __post_init__(self):
        object.__setattr__(self, "case", CASE_ALIASES.get(self.case, self.case))
        if self.case not in _BUILTIN:
            raise ValueError(f"unknown case {self.case!r}")
        if not 0 <= self.p <= MAX_RT_ORDER:
            raise ValueError(f"p must lie in [0, {MAX_RT_ORDER}], got {self.p}")
        levels = default_levels(self.p) if self.levels is None else tuple(self.levels)
        lo, hi = levels
        if lo < 0 or hi < lo:
            raise ValueError(f"bad level range {levels}")
        object.__setattr__(self, "levels", (int(lo), int(hi)))


@dataclass(frozen=True)
class LevelRow:
    level: int
    h: float
    ndof: int
    err_u: float
    err_sigma: float
    err_lambda_h1: Optional[float] = None
    solver: str = ""

    @property
    def err_solution(self) -> float:
        return float(np.hypot(self.err_u, self.err_sigma))


def _rates_with_roundoff(errors, hs):
    out: list = [None]
    for k in range(1, len(errors)):
        e0, e1 = errors[k - 1], errors[k]
        if e0 is None or e1 is None:
            out.append(None)
        elif e0 <= ROUNDOFF or e1 <= ROUNDOFF:
            out.append(CONVERGED_TO_ROUNDOFF)
        else:
            out.append(compute_rates([e0, e1], [hs[k - 1], hs[k]])[0])
    return out


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.16g}"


@dataclass
class ConvergenceReport:
    case: str
    p: int
    rows: list[LevelRow] = field(default_factory=list)

    QUANTITIES = ("u", "sigma", "lambda_h1")
    # the pair (sigma, u) is reported in the JSON summary only
    SUMMARY_QUANTITIES = QUANTITIES + ("solution",)

    def errors(self, name: str) -> list[Optional[float]]:
        return [getattr(r, f"err_{name}") for r in self.rows]

    @property
    def hs(self) -> list[float]:
        return [r.h for r in self.rows]

    def rates(self, name: str) -> list:
        return _rates_with_roundoff(self.errors(name), self.hs)

    def summary_rate(self, name: str):
        """Rate between the two finest levels (None if undefined)."""
        if len(self.rows) < 2:
            return None
        return self.rates(name)[-1]

    def band_checks(self) -> dict[str, dict]:
        out = {}
        for name, (lo, hi) in expected_bands(self.case, self.p).items():
            r = self.summary_rate(name)
            ok = isinstance(r, float) and lo <= r <= hi
            out[name] = {"rate": r, "band": [lo, hi], "passed": ok}
        return out

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.band_checks().values())

    def to_csv(self) -> str:
        rates = {q: self.rates(q) for q in self.QUANTITIES}
        lines = [CSV_HEADER]
        for k, r in enumerate(self.rows):
            cells = [r.level, r.h, r.ndof, r.err_u, r.err_sigma, r.err_lambda_h1]
            cells += [rates[q][k] for q in self.QUANTITIES]
            lines.append(",".join(_fmt(c) for c in cells))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        def num(x):
            # floats travel as tagged strings so they print with 16 digits like the CSV
            return f"{_NUM_TAG}{x:.16g}" if isinstance(x, float) else x

        checks = self.band_checks()
        doc = {
            "case": self.case,
            "p": self.p,
            "levels": [self.rows[0].level, self.rows[-1].level] if self.rows else [],
            "summary_rates": {q: num(self.summary_rate(q)) for q in self.SUMMARY_QUANTITIES},
            "bands": {
                q: {"band": c["band"], "rate": num(c["rate"]), "passed": c["passed"]}
                for q, c in checks.items()
            },
            "passed": self.passed,
        }
        text = json.dumps(doc, indent=2, sort_keys=True)
        return re.sub(f'"{_NUM_TAG}([^"]*)"', r"\1", text) + "\n"

    def write(self, path) -> tuple[Path, Path]:
        """Write ``path`` as CSV and a sibling ``.json`` summary."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        jpath = path.with_suffix(".json")
        jpath.write_text(self.to_json())
        return path, jpath


def run_level(case: ProblemCase, p: int, level: int, quad_degree=None, boundary_term=True):
    mesh = build_uniform_mesh(level)
    space = build_dof_space(mesh, p)
    M = assemble_stiffness(mesh, space, case)
    rhs = assemble_load(mesh, space, case, quad_degree=quad_degree, boundary_term=boundary_term)
    sol = solve(SparseSystem(M, rhs, label=f"{case.name} p={p} level={level}"))
    return space, sol, error_norms(case, space, sol, quad_degree=quad_degree)


def run_study(config: StudyConfig) -> ConvergenceReport:
    case = builtin_case(config.case)
    report = ConvergenceReport(config.case, config.p)
    lo, hi = config.levels
    for level in range(lo, hi + 1):
        space, sol, err = run_level(
            case, config.p, level, config.quad_degree, config.boundary_term
        )
        report.rows.append(
            LevelRow(
                level=level,
                h=space.mesh.h,
                ndof=space.n_total,
                err_u=err.err_u,
                err_sigma=err.err_sigma,
                err_lambda_h1=err.err_lambda_h1,
                solver=sol.method,
            )
        )
    if config.output is not None:
        report.write(config.output)
    return report
