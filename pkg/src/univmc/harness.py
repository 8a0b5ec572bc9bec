"""Block-model sweeps, noise sweeps and real-matrix runs, with CSV persistence.

Every trial is keyed by an integer seed derived from ``(seed0, budget index,
p index, trial index)``. The stored seed alone regenerates the trial:

* the sample set is ``gen_block_model(BlockModelParams(n1, n2, p, q, seed))``;
* the Gaussian factors come from ``default_rng([seed, 1])``;
* the noise for noise level index ``k`` comes from ``default_rng([seed, 2, k])``.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .completion import SolverConfig, solve_nuclear_norm
from .core import as_matrix, best_rank_k, project_omega, singular_values, spectral_norm
from .errors import InvalidArgumentError
from .graphs import BlockModelParams, gen_block_model, spectrum

__all__ = [
    "CSV_VERSION",
    "SweepSpec",
    "SweepRow",
    "RealRow",
    "default_p_grid",
    "trial_seed",
    "trial_instance",
    "run_sweep",
    "run_real",
    "aggregate",
    "transition_check",
    "write_csv",
    "read_csv",
]

CSV_VERSION = "univmc-sweep v1"
GRID_POINTS = 9


def default_p_grid(budget, points=GRID_POINTS):
    """``points`` values of p from ``budget/2`` (q = p, largest gap) to ``min(budget, 1)``."""
    return [float(v) for v in np.linspace(budget / 2.0, min(budget, 1.0), points)]


@dataclass(frozen=True)
class SweepSpec:
    n: int = 500
    r: int = 10
    budgets: tuple = (0.2, 0.3, 0.4)
    p_grid: dict | None = None
    trials: int = 50
    noise_sigma: tuple | None = None
    seed0: int = 0
    output_path: str | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgumentError("n must be at least 2")
        if not 1 <= self.r <= self.n:
            raise InvalidArgumentError(f"rank r={self.r} must lie in [1, n]")
        if self.trials < 1:
            raise InvalidArgumentError("trials must be at least 1")
        if not self.budgets:
            raise InvalidArgumentError("at least one budget is required")
        for b in self.budgets:
            if not 0.0 < b <= 2.0:
                raise InvalidArgumentError(f"budget {b} must lie in (0, 2]")
            for p in self.grid(b):
                if not 0.0 <= p <= b or b - p > 1.0 or p > 1.0:
                    raise InvalidArgumentError(f"p={p} with budget {b} gives probabilities outside [0, 1]")
        for s in self.noise_sigma or ():
            if s < 0:
                raise InvalidArgumentError("noise levels must be nonnegative")

    def grid(self, budget):
        if self.p_grid is None:
            return default_p_grid(budget)
        if isinstance(self.p_grid, dict):
            if budget not in self.p_grid:
                raise InvalidArgumentError(f"no p grid for budget {budget}")
            return [float(p) for p in self.p_grid[budget]]
        return [float(p) for p in self.p_grid]

    def sigmas(self):
        return tuple(self.noise_sigma) if self.noise_sigma else (0.0,)


@dataclass
class SweepRow:
    budget: float
    p: float
    q: float
    noise_sigma: float
    trial: int
    seed: int
    relative_gap: float
    success: bool
    rel_error: float
    iterations: int
    wall_time: float
    error: str = ""


@dataclass
class RealRow:
    budget: float
    p: float
    q: float
    trial: int
    seed: int
    relative_gap: float
    spectral_error: float
    floor: float
    iterations: int
    wall_time: float
    error: str = ""


def trial_seed(seed0, bi, pi, t):
    """Independent 63-bit seed for one (budget, p, trial) cell entry."""
    state = np.random.SeedSequence([int(seed0), int(bi), int(pi), int(t)]).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def trial_instance(n, r, p, q, seed, n2=None):
    """Regenerate ``(M, omega)`` for a stored trial seed."""
    n2 = n if n2 is None else n2
    omega = gen_block_model(BlockModelParams(n, n2, p, q, seed=seed))
    rng = np.random.default_rng([seed, 1])
    U = rng.standard_normal((n, r))
    V = rng.standard_normal((n2, r))
    return U @ V.T, omega


def _noise(shape, sigma, ref_norm, seed, k):
    if sigma == 0:
        return 0.0
    Z = np.random.default_rng([seed, 2, k]).standard_normal(shape)
    return Z * (sigma * ref_norm / np.linalg.norm(Z))


def _sweep_task(args):
    spec, budget, p, t, seed = args
    q = budget - p
    rows = []
    try:
        M, omega = trial_instance(spec.n, spec.r, p, q, seed)
        gap = spectrum(omega).relative_gap if omega.size else 0.0
    except Exception as exc:  # recorded per row
        return [SweepRow(budget, p, q, s, t, seed, math.nan, False, math.nan, 0, 0.0, f"{type(exc).__name__}: {exc}")
                for s in spec.sigmas()]
    m_norm = float(np.linalg.norm(M))
    for k, sigma in enumerate(spec.sigmas()):
        start = time.perf_counter()
        try:
            observed = project_omega(M + _noise(M.shape, sigma, m_norm, seed, k), omega)
            res = solve_nuclear_norm(observed, omega, spec.solver, truth=M)
            rows.append(SweepRow(budget, p, q, sigma, t, seed, gap, res.success, res.rel_error_vs_truth,
                                 res.iterations, time.perf_counter() - start))
        except Exception as exc:  # recorded per row
            rows.append(SweepRow(budget, p, q, sigma, t, seed, gap, False, math.nan, 0,
                                 time.perf_counter() - start, f"{type(exc).__name__}: {exc}"))
    return rows


def _map(fn, tasks, threads):
    if threads and threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            # map yields in submission order
            return list(pool.map(fn, tasks))
    return [fn(task) for task in tasks]


def run_sweep(spec, threads=1, progress=None):
    """Run every (budget, p, trial) cell; rows come back in that order regardless of ``threads``.

    Failing trials produce rows with ``success=False`` and the exception
    text in ``error``. Rows are written to ``spec.output_path`` when set.
    """
    tasks = []
    for bi, budget in enumerate(spec.budgets):
        for pi, p in enumerate(spec.grid(budget)):
            for t in range(spec.trials):
                tasks.append((spec, float(budget), float(p), t, trial_seed(spec.seed0, bi, pi, t)))
    rows = []
    for chunk in _map(_sweep_task, tasks, threads):
        rows.extend(chunk)
        if progress is not None:
            progress(chunk)
    if spec.output_path:
        write_csv(spec.output_path, rows)
    return rows


def _real_task(args):
    T, budget, p, t, seed, cfg, rank = args
    q = budget - p
    start = time.perf_counter()
    t_norm = spectral_norm(T)
    s = singular_values(T)
    floor = float(s[1] / s[0]) if s.size > 1 and s[0] > 0 else 0.0
    try:
        omega = gen_block_model(BlockModelParams(T.shape[0], T.shape[1], p, q, seed=seed))
        gap = spectrum(omega).relative_gap
        res = solve_nuclear_norm(project_omega(T, omega), omega, cfg)
        X = best_rank_k(res.X, rank) if rank is not None else res.X
        err = spectral_norm(X - T) / t_norm if t_norm > 0 else spectral_norm(X - T)
        return RealRow(budget, p, q, t, seed, gap, err, floor, res.iterations, time.perf_counter() - start)
    except Exception as exc:  # recorded per row
        return RealRow(budget, p, q, t, seed, math.nan, math.nan, floor, 0, time.perf_counter() - start,
                       f"{type(exc).__name__}: {exc}")


def run_real(T, budgets=(0.4,), p_grid=None, trials=1, seed0=0, cfg=None, rank=1, threads=1, output_path=None):
    """Block-model sweep over a fixed matrix ``T``, scored by ``||X - T|| / ||T||`` in spectral norm.

    ``T`` is an array or a path to a matrix file. The completed matrix is
    truncated to ``rank`` before scoring (``None`` keeps it whole); for
    rank 1 the error can never fall below ``floor = sigma2(T)/sigma1(T)``.
    """
    if not isinstance(T, np.ndarray):
        from .io import load_matrix

        T = load_matrix(T)
    T = as_matrix(T, "T")
    cfg = cfg or SolverConfig()
    if rank is not None and not 1 <= rank <= min(T.shape):
        raise InvalidArgumentError(f"rank {rank} out of range for a {T.shape[0]}x{T.shape[1]} matrix")
    tasks = []
    for bi, budget in enumerate(budgets):
        if not 0.0 < budget <= 2.0:
            raise InvalidArgumentError(f"budget {budget} must lie in (0, 2]")
        grid = p_grid.get(budget) if isinstance(p_grid, dict) else p_grid
        grid = default_p_grid(budget) if grid is None else grid
        for pi, p in enumerate(grid):
            if not 0.0 <= p <= budget or p > 1.0 or budget - p > 1.0:
                raise InvalidArgumentError(f"p={p} with budget {budget} gives probabilities outside [0, 1]")
            for t in range(trials):
                tasks.append((T, float(budget), float(p), t, trial_seed(seed0, bi, pi, t), cfg, rank))
    rows = _map(_real_task, tasks, threads)
    if output_path:
        write_csv(output_path, rows)
    return rows


def aggregate(rows):
    """Per-cell summary: success ratio, mean error and mean gap for each (budget, p, noise) cell."""
    cells = {}
    for row in rows:
        key = (row.budget, row.p, getattr(row, "noise_sigma", 0.0))
        cells.setdefault(key, []).append(row)
    out = []
    for (budget, p, sigma), group in cells.items():
        errs = [getattr(r, "rel_error", getattr(r, "spectral_error", math.nan)) for r in group]
        finite = [e for e in errs if math.isfinite(e)]
        gaps = [r.relative_gap for r in group if math.isfinite(r.relative_gap)]
        entry = {
            "budget": budget,
            "p": p,
            "q": budget - p,
            "noise_sigma": sigma,
            "trials": len(group),
            "failures": sum(1 for r in group if r.error),
            "mean_relative_gap": float(np.mean(gaps)) if gaps else math.nan,
            "mean_error": float(np.mean(finite)) if finite else math.nan,
        }
        if hasattr(group[0], "success"):
            entry["success_ratio"] = float(np.mean([bool(r.success) for r in group]))
        out.append(entry)
    return out


def transition_check(cells, min_jump=0.3, allowed_violations=1):
    """Per-budget phase-transition summary over aggregated cells.

    Cells are ordered by mean relative gap. Reports the success-ratio jump
    from the smallest-gap cell to the largest-gap cell and the number of
    adjacent pairs where the ratio decreases.
    """
    out = {}
    for budget in sorted({c["budget"] for c in cells}):
        group = sorted((c for c in cells if c["budget"] == budget), key=lambda c: c["mean_relative_gap"])
        ratios = [c["success_ratio"] for c in group]
        jump = ratios[-1] - ratios[0]
        violations = sum(1 for a, b in zip(ratios, ratios[1:]) if b < a)
        out[budget] = {
            "gaps": [c["mean_relative_gap"] for c in group],
            "ratios": ratios,
            "jump": jump,
            "violations": violations,
            "passed": bool(jump >= min_jump and violations <= allowed_violations),
        }
    return out


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, rows):
    """Write rows with a ``# <version> <type>`` comment line ahead of the column header."""
    if not rows:
        raise InvalidArgumentError("no rows to write")
    cls = type(rows[0])
    names = [f.name for f in fields(cls)]
    with open(path, "w", newline="") as fh:
        fh.write(f"# {CSV_VERSION} {cls.__name__}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in rows:
            w.writerow([_fmt(getattr(row, n)) for n in names])


def read_csv(path):
    """Read a CSV written by :func:`write_csv` back into row objects."""
    from .errors import FileFormatError

    with open(path, newline="") as fh:
        first = fh.readline().strip()
        parts = first.lstrip("# ").rsplit(" ", 1)
        if not first.startswith("#") or len(parts) != 2 or parts[0] != CSV_VERSION:
            raise FileFormatError(f"missing or unknown version line {first!r}", path=str(path), line=1)
        cls = {"SweepRow": SweepRow, "RealRow": RealRow}.get(parts[1])
        if cls is None:
            raise FileFormatError(f"unknown row type {parts[1]!r}", path=str(path), line=1)
        reader = csv.DictReader(fh)
        types = {f.name: f.type for f in fields(cls)}
        rows = []
        for lineno, rec in enumerate(reader, start=3):
            try:
                kw = {}
                for name, typ in types.items():
                    raw = rec[name]
                    if typ == "bool":
                        kw[name] = raw == "1"
                    elif typ == "int":
                        kw[name] = int(raw)
                    elif typ == "float":
                        kw[name] = float(raw)
                    else:
                        kw[name] = raw or ""
                rows.append(cls(**kw))
            except (KeyError, ValueError, TypeError) as exc:
                raise FileFormatError(f"bad row: {exc}", path=str(path), line=lineno) from exc
    return rows


def rows_as_dicts(rows, exclude=()):
    return [{k: v for k, v in asdict(r).items() if k not in exclude} for r in rows]


def with_solver(spec, **overrides):
    """Copy of ``spec`` with solver settings replaced."""
    return replace(spec, solver=replace(spec.solver, **overrides))
