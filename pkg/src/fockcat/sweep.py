"""Parameter sweeps and 1D optimizers over displacements, squeezing and splitter reflectance.

Every point evaluation is a pure function of ``(config, alpha, beta)``; grids
may be fanned out over worker processes and are always collected in grid
order, so identical configurations give identical records.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache, partial
from typing import Callable, Iterable, Sequence

import numpy as np

from .entanglement import density_from_ensemble, entropy_of_entanglement, log_negativity
from .errors import ParameterError
from .fock import DEFAULT_NMAX, PureTwoMode, truncation_report
from .states import SplitterParam, qutrit_state, split_smsv, weak_input
from .subtraction import (
    BranchEnsemble,
    SubtractionParams,
    filter_double_ideal,
    filter_single_ideal,
    mixed_output_double,
    mixed_output_single,
)

log = logging.getLogger(__name__)

FLAG_TAIL = 1e-4
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ParameterError(f"grid needs at least 2 points, got {self.count}")
        if not self.hi > self.lo:
            raise ParameterError(f"grid needs hi > lo, got [{self.lo}, {self.hi}]")

    def values(self) -> np.ndarray:
        v = np.linspace(self.lo, self.hi, self.count)
        # symmetric grids must hit zero exactly
        v[np.abs(v) < 1e-12 * max(abs(self.lo), abs(self.hi))] = 0.0
        return v


@dataclass(frozen=True)
class ScenarioConfig:
    model: str = "realistic"
    scheme: str = "single"
    lam: float = 0.2
    R: float = 0.5
    R_s: float = 0.1
    eta: float = 1.0
    n_max: int = DEFAULT_NMAX
    k_max: int | None = None
    alpha_grid: Grid = Grid(-0.5, 0.5, 41)
    beta_grid: Grid = Grid(-0.5, 0.5, 41)
    input: str = "full"
    alpha_hi: float = 1.0
    coarse_points: int = 41
    xtol: float = 1e-4

    def __post_init__(self):
        if self.model not in ("ideal", "realistic"):
            raise ParameterError(f"model must be 'ideal' or 'realistic', got {self.model!r}")
        if self.scheme not in ("single", "double"):
            raise ParameterError(f"scheme must be 'single' or 'double', got {self.scheme!r}")
        if self.input not in ("full", "weak"):
            raise ParameterError(f"input must be 'full' or 'weak', got {self.input!r}")
        if not 0.0 <= self.lam < 1.0:
            raise ParameterError(f"lambda must lie in [0, 1), got {self.lam}")
        for name in ("R", "R_s", "eta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {v}")
        if self.n_max < 2:
            raise ParameterError(f"n_max must be >= 2, got {self.n_max}")
        if self.k_max is not None and self.k_max < 1:
            raise ParameterError(f"k_max must be >= 1, got {self.k_max}")
        if self.coarse_points < 3:
            raise ParameterError("coarse_points must be >= 3")

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def subtraction(self, alpha: complex = 0.0, beta: complex = 0.0, eta: float | None = None) -> SubtractionParams:
        return SubtractionParams.from_intensity(
            self.R_s, eta=self.eta if eta is None else eta, k_max=self.k_max, alpha=alpha, beta=beta
        )

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepRecord:
    params: dict
    E: float
    P: float | None = None
    tail: float = 0.0
    kind: str = "entropy"
    extra: dict = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return self.tail > FLAG_TAIL

    def row(self) -> dict:
        out = dict(self.params)
        out["E"] = self.E
        if self.P is not None:
            out["P"] = self.P
        out.update(self.extra)
        out["tail"] = self.tail
        return out


@lru_cache(maxsize=64)
def _input_state(lam: float, R: float, n_max: int, kind: str) -> PureTwoMode:
    sp = SplitterParam.from_R(R)
    if kind == "weak":
        return weak_input(lam, sp, n_max)
    return split_smsv(lam, sp, n_max)


def input_state(config: ScenarioConfig) -> PureTwoMode:
    return _input_state(config.lam, config.R, config.n_max, config.input)


def _relative_tail(state: PureTwoMode) -> float:
    return truncation_report(state, warn=False).relative_tail


def _ensemble_tail(ens: BranchEnsemble) -> float:
    if ens.success_prob <= 0:
        return 0.0
    tail = sum(b.herald_weight * truncation_report(b.state, warn=False).tail_weight for b in ens.branches)
    return tail / ens.success_prob


def build_output(config: ScenarioConfig, alpha: float = 0.0, beta: float = 0.0, eta: float | None = None):
    """Filtered pure state (ideal model) or heralded ensemble (realistic model)."""
    c = input_state(config)
    if config.model == "ideal":
        if config.scheme == "single":
            return filter_single_ideal(c, alpha)
        return filter_double_ideal(c, alpha, beta)
    params = config.subtraction(alpha, beta, eta)
    if config.scheme == "single":
        return mixed_output_single(c, params)
    return mixed_output_double(c, params)


def evaluate(config: ScenarioConfig, alpha: float = 0.0, beta: float = 0.0, eta: float | None = None) -> SweepRecord:
    """Entanglement (and success probability for the realistic model) at one displacement point."""
    out = build_output(config, alpha, beta, eta)
    in_tail = _relative_tail(input_state(config))
    params = {"alpha": float(alpha)}
    if config.scheme == "double":
        params["beta"] = float(beta)
    if config.model == "ideal":
        E = entropy_of_entanglement(out).value
        return SweepRecord(params, E, None, max(in_tail, _relative_tail(out)), "entropy")
    res = log_negativity(density_from_ensemble(out))
    return SweepRecord(params, res.value, out.success_prob, max(in_tail, _ensemble_tail(out)), "log_negativity")


def _evaluate_point(config: ScenarioConfig, point: tuple) -> SweepRecord:
    return evaluate(config, *point)


def _map(fn: Callable, items: Sequence, workers: int | None) -> list:
    if not workers or workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _require(config: ScenarioConfig, scheme: str | None = None, model: str | None = None) -> None:
    if scheme and config.scheme != scheme:
        raise ParameterError(f"this sweep needs scheme={scheme!r}, config has {config.scheme!r}")
    if model and config.model != model:
        raise ParameterError(f"this sweep needs model={model!r}, config has {config.model!r}")


def sweep_single_alpha(config: ScenarioConfig, workers: int | None = None) -> list[SweepRecord]:
    """Entanglement versus the single displacement ``alpha`` over ``config.alpha_grid``."""
    _require(config, scheme="single")
    points = [(float(a),) for a in config.alpha_grid.values()]
    return _map(partial(_evaluate_point, config), points, workers)


def sweep_double_grid(config: ScenarioConfig, workers: int | None = None) -> list[list[SweepRecord]]:
    """Entanglement on the real ``(alpha, beta)`` grid; rows follow alpha, columns beta."""
    _require(config, scheme="double")
    alphas, betas = config.alpha_grid.values(), config.beta_grid.values()
    points = [(float(a), float(b)) for a in alphas for b in betas]
    flat = _map(partial(_evaluate_point, config), points, workers)
    nb = len(betas)
    return [flat[i * nb : (i + 1) * nb] for i in range(len(alphas))]


def hyperbola_cut(
    lam: float,
    splitter: SplitterParam,
    alpha_grid: Iterable[float],
    n_max: int = DEFAULT_NMAX,
    input: str = "full",
) -> list[SweepRecord]:
    """Ideal double filtration along ``beta = -lam r t / alpha``; ``alpha = 0`` points are skipped."""
    config = ScenarioConfig(model="ideal", scheme="double", lam=lam, R=splitter.R, n_max=n_max, input=input)
    out = []
    for a in alpha_grid:
        a = float(a)
        if a == 0.0:
            log.warning("hyperbola_cut: alpha = 0 has no reciprocal partner, point skipped")
            continue
        out.append(evaluate(config, a, -lam * splitter.r * splitter.t / a))
    return out


def qutrit_entropy_vs_R(R_grid: Iterable[float]) -> list[SweepRecord]:
    out = []
    for R in R_grid:
        R = float(R)
        if not 0.0 < R < 1.0:
            raise ParameterError(f"R must lie in (0, 1), got {R}")
        E = entropy_of_entanglement(qutrit_state(SplitterParam.from_R(R), n_max=2)).value
        out.append(SweepRecord({"R": R}, E))
    return out


def diagonal_cut(config: ScenarioConfig, alpha_grid: Iterable[float], workers: int | None = None) -> list[SweepRecord]:
    """Realistic double subtraction along ``beta = -alpha``."""
    _require(config, scheme="double", model="realistic")
    points = [(float(a), -float(a)) for a in alpha_grid]
    return _map(partial(_evaluate_point, config), points, workers)


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-4, max_iter: int = 200):
    """Maximize a unimodal ``f`` on ``[lo, hi]`` until the bracket is shorter than ``xtol``.

    Returns ``(x, f(x), evaluations)``.
    """
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    while abs(b - a) > xtol and n < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
        n += 1
    x = 0.5 * (a + b)
    return x, f(x), n + 1


@dataclass(frozen=True)
class Optimum:
    x: float
    E: float
    P: float | None
    at_boundary: bool
    bracket: tuple[float, float]
    bracket_values: tuple[float, float]
    tail: float = 0.0


def _grid_then_golden(f: Callable[[float], SweepRecord], lo: float, hi: float, points: int, xtol: float) -> Optimum:
    xs = np.linspace(lo, hi, points)
    recs = [f(float(x)) for x in xs]
    vals = np.array([r.E for r in recs])
    i = int(np.argmax(vals))
    if i == 0 or i == points - 1:
        log.info("no interior maximum on [%g, %g]; returning boundary point", lo, hi)
        r = recs[i]
        j = 1 if i == 0 else points - 2
        br = (float(xs[min(i, j)]), float(xs[max(i, j)]))
        bv = (float(vals[min(i, j)]), float(vals[max(i, j)]))
        return Optimum(float(xs[i]), r.E, r.P, True, br, bv, r.tail)
    a, b = float(xs[i - 1]), float(xs[i + 1])
    x, _, _ = golden_section_max(lambda v: f(v).E, a, b, xtol)
    best = f(x)
    if best.E < recs[i].E:
        x, best = float(xs[i]), recs[i]
    return Optimum(x, best.E, best.P, False, (a, b), (float(vals[i - 1]), float(vals[i + 1])), best.tail)


def optimize_diagonal(config: ScenarioConfig, eta: float | None = None) -> Optimum:
    """Best ``alpha`` on ``beta = -alpha`` in ``[0, alpha_hi]``: coarse scan, then golden-section refinement."""
    _require(config, scheme="double", model="realistic")
    f = lambda a: evaluate(config, a, -a, eta)  # noqa: E731
    return _grid_then_golden(f, 0.0, config.alpha_hi, config.coarse_points, config.xtol)


def _lambda_point(config: ScenarioConfig, point: tuple[float, float]) -> SweepRecord:
    eta, lam = point
    cfg = config.with_(lam=lam, eta=eta)
    if config.scheme == "single":
        r = evaluate(cfg, 0.0)
        return SweepRecord({"eta": eta, "lambda": lam, "alpha": 0.0}, r.E, r.P, r.tail, r.kind)
    opt = optimize_diagonal(cfg)
    return SweepRecord(
        {"eta": eta, "lambda": lam, "alpha_opt": opt.x},
        opt.E,
        opt.P,
        opt.tail,
        "log_negativity",
        {"sqrt_half_lambda": math.sqrt(lam / 2.0), "boundary": int(opt.at_boundary)},
    )


def curves_vs_lambda(
    config: ScenarioConfig,
    lambda_grid: Iterable[float],
    etas: Sequence[float] | None = None,
    workers: int | None = None,
) -> list[SweepRecord]:
    """Per-``eta`` curves over squeezing: ``alpha = 0`` for single subtraction, optimal diagonal for double."""
    _require(config, model="realistic")
    etas = tuple(etas) if etas is not None else (config.eta,)
    points = [(float(e), float(l)) for e in etas for l in lambda_grid]
    return _map(partial(_lambda_point, config), points, workers)


def optimize_input_reflectance(config: ScenarioConfig, lo: float = 0.4, hi: float = 0.6) -> Optimum:
    """Maximize entanglement over the input splitter reflectance ``R`` (single scheme, ``alpha = 0``)."""
    _require(config, scheme="single")
    f = lambda R: evaluate(config.with_(R=R), 0.0)  # noqa: E731
    return _grid_then_golden(f, lo, hi, config.coarse_points, config.xtol)
