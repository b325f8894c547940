"""
smallball: command execution and parameter sweeps

`execute` runs one command on loaded inputs and returns a JSON-ready record
plus long-form summary rows. Sweeps expand a parameter grid into cells and
run them in batches through asyncio.gather over a thread pool; rows come
back in cell order whatever the completion order, and every cell gets the
seed derive_seed(seed, cell_index).
"""

import asyncio
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Any, Dict, List, NamedTuple, Optional

from pydantic import BaseModel

from smallball.concentration import (
    discrete_sampler,
    q_coordinate_bounds,
    q_exact,
    q_monte_carlo,
    q_weighted_sum,
    q_window_regularity,
    weighted_sum_sampler,
)
from smallball.config import SmallballConfig
from smallball.dist import load_distribution, load_weights, measure_from_points, weighted_sum_law
from smallball.exceptions import InvalidParameterError
from smallball.gap import beta, beta_bound
from smallball.infdiv import h_cf, mass_at_zero, q_h_estimate, sample_h, smoothing_atom_bound, smoothing_bound
from smallball.inverse import fit_gap, plant, verify_inverse_cardinality, verify_k1_log_n, verify_k1_structure
from smallball.models.concentration import ConcentrationResult, CoordinateBounds, MCConfig
from smallball.models.dist import AtomicMeasure
from smallball.models.experiment import ExperimentConfig
from smallball.models.gap import BetaResult
from smallball.models.infdiv import SmoothingLaw
from smallball.models.inverse import InversePrincipleReport, PlantedInstance, StructureReport
from smallball.models.reports import BoundReport
from smallball.utils import derive_seed, load_model, to_jsonable

logger = logging.getLogger(__name__)

ROW_FIELDS = ["command", "inequality_id", "quantity", "value", "params"]


class Outcome(NamedTuple):
    """Result of one command: a JSON-ready record and long-form summary rows"""
    record: Dict[str, Any]
    rows: List[Dict[str, Any]]


def _mc(params: Dict[str, Any], seed: Optional[int], settings: SmallballConfig) -> MCConfig:
    return MCConfig(
        sample_count=int(params.get("samples", settings.mc_samples)),
        seed=seed or 0,
        center_grid_resolution=int(params.get("center_grid_resolution", settings.center_grid_resolution)),
        substreams=int(params.get("substreams", settings.mc_substreams)),
    )


def _require(params: Dict[str, Any], *keys: str) -> None:
    missing = [k for k in keys if k not in params]
    if missing:
        raise InvalidParameterError(f"missing parameters: {', '.join(missing)}")


def _per_coordinate(params: Dict[str, Any], plural: str, singular: str, d: int) -> List[Any]:
    if plural in params:
        return list(params[plural])
    _require(params, singular)
    return [params[singular]] * d


def _report_rows(report: BoundReport) -> List[Dict[str, Any]]:
    rows = []
    for quantity in ("lhs", "rhs_unconstanted", "implied_constant"):
        rows.append({"inequality_id": report.inequality_id.value, "quantity": quantity,
                     "value": getattr(report, quantity)})
    rows.append({"inequality_id": report.inequality_id.value, "quantity": "vacuous", "value": report.vacuous})
    return rows


def _rows(result: BaseModel) -> List[Dict[str, Any]]:
    """Long-form summary rows for a result model."""
    if isinstance(result, BoundReport):
        return _report_rows(result)
    if isinstance(result, ConcentrationResult):
        return [{"inequality_id": "", "quantity": "q", "value": result.value},
                {"inequality_id": "", "quantity": "stderr", "value": result.stderr}]
    if isinstance(result, CoordinateBounds):
        rows = [{"inequality_id": "", "quantity": f"q_{j}", "value": r.value} for j, r in enumerate(result.q, 1)]
        rows.append({"inequality_id": "", "quantity": "product_q", "value": result.product_q})
        if result.product_report is not None:
            rows.extend(_report_rows(result.product_report))
        return rows
    if isinstance(result, BetaResult):
        return [{"inequality_id": "", "quantity": "beta", "value": result.value},
                {"inequality_id": "", "quantity": "exhaustive", "value": result.exhaustive}]
    if isinstance(result, InversePrincipleReport):
        rows = [{"inequality_id": "", "quantity": "covered", "value": result.coverage.covered_count},
                {"inequality_id": "", "quantity": "rank", "value": result.rank},
                {"inequality_id": "", "quantity": "cardinality", "value": result.cardinality}]
        for report in result.reports:
            rows.extend(_report_rows(report))
        return rows
    if isinstance(result, StructureReport):
        rows = [{"inequality_id": "", "quantity": "rank", "value": result.rank},
                {"inequality_id": "", "quantity": "outside_mass", "value": result.outside_mass}]
        rows.extend(_report_rows(result.rank_report))
        rows.extend(_report_rows(result.mass_report))
        return rows
    if isinstance(result, PlantedInstance):
        return [{"inequality_id": "", "quantity": "outliers", "value": len(result.outlier_indices)}]
    return []


def _run_q(inputs, params, seed, settings) -> BaseModel:
    _require(params, "tau")
    dist = load_distribution(inputs["dist"])
    tau = params["tau"]
    method = params.get("method", "auto")
    mc = _mc(params, seed, settings)

    if "weights" not in inputs:
        if "m" in params:
            return q_window_regularity(dist, tau, int(params["m"]))
        if method == "monte-carlo":
            return q_monte_carlo(discrete_sampler(dist), tau, mc)
        return q_exact(dist, tau)

    a = load_weights(inputs["weights"])
    if a.d > 1:
        return q_coordinate_bounds(a, dist, tau, mc if method == "monte-carlo" else None,
                                   settings.max_atoms, settings.mitm_threshold)
    if method == "monte-carlo":
        return q_monte_carlo(weighted_sum_sampler(a, dist), tau, mc)
    if method == "exact":
        return q_exact(weighted_sum_law(a, dist, settings.max_atoms, settings.mitm_threshold), tau)
    return q_weighted_sum(a, dist, tau, mc, settings.max_atoms, settings.mitm_threshold)


def _run_smooth(inputs, params, seed, settings) -> Outcome:
    _require(params, "lambda")
    law = SmoothingLaw(weights=load_weights(inputs["weights"]), intensity=params["lambda"])
    mc = _mc(params, seed, settings)
    tol = float(params.get("tol", settings.zero_mass_tol))

    atom = mass_at_zero(law, tol, mc=mc)
    record: Dict[str, Any] = {"mass_at_zero": atom.model_dump(mode="json")}
    rows = [{"inequality_id": "", "quantity": "mass_at_zero", "value": atom.value},
            {"inequality_id": "", "quantity": "mass_at_zero_error", "value": atom.error}]
    if "delta" in params:
        estimate = q_h_estimate(law, params["delta"], mc, float(params.get("esseen_constant",
                                                                            settings.esseen_constant)))
        record["q_h"] = estimate.model_dump(mode="json")
        if estimate.esseen_bound is not None:
            rows.append({"inequality_id": "", "quantity": "esseen_bound", "value": estimate.esseen_bound})
        rows.append({"inequality_id": "", "quantity": "q_h", "value": estimate.value})
    if "t" in params:
        value = h_cf(law, params["t"])
        record["cf"] = value
        rows.append({"inequality_id": "", "quantity": "cf", "value": value})
    if "draws" in params:
        record["samples"] = [list(sample_h(law, derive_seed(seed or 0, i))) for i in range(int(params["draws"]))]
    return Outcome(record, rows)


def _run_smoothing_bound(inputs, params, seed, settings) -> BaseModel:
    a = load_weights(inputs["weights"])
    dist = load_distribution(inputs["dist"])
    mc = _mc(params, seed, settings)
    if params.get("form") == "atom":
        return smoothing_atom_bound(a, dist, float(params.get("tol", settings.zero_mass_tol)), mc,
                                    settings.max_atoms)
    _require(params, "tau", "kappa", "delta")
    return smoothing_bound(a, dist, params["tau"], params["kappa"], params["delta"], mc,
                           float(params.get("esseen_constant", settings.esseen_constant)),
                           settings.max_atoms, settings.mitm_threshold)


def _run_beta_bound(inputs, params, seed, settings) -> BaseModel:
    _require(params, "tau", "kappa", "delta", "r", "m")
    return beta_bound(
        load_weights(inputs["weights"]),
        load_distribution(inputs["dist"]),
        params["tau"], params["kappa"], params["delta"], int(params["r"]), int(params["m"]),
        depth=int(params.get("depth", settings.candidate_depth)),
        exhaustive_budget=int(params.get("budget", settings.exhaustive_budget)),
        max_rank=settings.max_rank,
        mc=_mc(params, seed, settings) if seed is not None else None,
        max_atoms=settings.max_atoms,
        mitm_threshold=settings.mitm_threshold,
    )


def _run_fit(inputs, params, seed, settings) -> BaseModel:
    _require(params, "tol", "n_prime")
    return fit_gap(
        load_weights(inputs["weights"]),
        params["tol"],
        int(params["n_prime"]),
        rank_cap=int(params.get("rank_cap", settings.max_rank)),
        volume_cap=int(params.get("volume_cap", 100)),
        depth=int(params.get("depth", settings.candidate_depth)),
        exhaustive_budget=int(params.get("budget", settings.exhaustive_budget)),
    )


def _run_inverse(inputs, params, seed, settings) -> BaseModel:
    _require(params, "tau", "eps", "theta", "A", "B", "rho")
    return verify_inverse_cardinality(
        load_weights(inputs["weights"]),
        load_distribution(inputs["dist"]),
        params["tau"], float(params["eps"]), float(params["theta"]),
        float(params["A"]), float(params["B"]), float(params["rho"]),
        n_prime=int(params["n_prime"]) if "n_prime" in params else None,
        rank_cap=int(params.get("rank_cap", settings.max_rank)),
        volume_cap=int(params.get("volume_cap", 100)),
        ratio_threshold=float(params.get("ratio_threshold", settings.ratio_threshold)),
        depth=int(params.get("depth", settings.candidate_depth)),
        exhaustive_budget=int(params.get("budget", settings.exhaustive_budget)),
        mc=_mc(params, seed, settings) if seed is not None else None,
        max_atoms=settings.max_atoms,
        mitm_threshold=settings.mitm_threshold,
    )


def _run_k1(inputs, params, seed, settings, log_n: bool) -> BaseModel:
    a = load_weights(inputs["weights"])
    dist = load_distribution(inputs["dist"])
    taus = _per_coordinate(params, "taus", "tau", a.d)
    deltas = _per_coordinate(params, "deltas", "delta", a.d)
    common = dict(
        rank_cap=int(params.get("rank_cap", settings.max_rank)),
        depth=int(params.get("depth", settings.candidate_depth)),
        exhaustive_budget=int(params.get("budget", settings.exhaustive_budget)),
        mc=_mc(params, seed, settings) if seed is not None else None,
        max_atoms=settings.max_atoms,
        mitm_threshold=settings.mitm_threshold,
    )
    if log_n:
        _require(params, "A", "B")
        return verify_k1_log_n(a, dist, taus, deltas, float(params["A"]), float(params["B"]), **common)
    return verify_k1_structure(a, dist, taus, deltas, **common)


def _run_beta(inputs, params, seed, settings) -> BaseModel:
    _require(params, "r", "m")
    if "measure" in inputs:
        W = load_model(inputs["measure"], AtomicMeasure)
    else:
        a = load_weights(inputs["weights"])
        W = measure_from_points(a.entries, a.d)
    return beta(W, int(params["r"]), int(params["m"]), params.get("tau", 0),
                depth=int(params.get("depth", settings.candidate_depth)),
                exhaustive_budget=int(params.get("budget", settings.exhaustive_budget)),
                max_rank=settings.max_rank)


def _run_plant(inputs, params, seed, settings) -> BaseModel:
    _require(params, "rank", "n")
    return plant(
        int(params["rank"]),
        int(params["n"]),
        d=int(params.get("d", 1)),
        generators=params.get("generators"),
        limits=params.get("limits"),
        noise=float(params.get("noise", 0.0)),
        outlier_fraction=float(params.get("outlier_fraction", 0.0)),
        seed=seed or 0,
    )


_HANDLERS = {
    "q": _run_q,
    "lemma1": _run_smoothing_bound,
    "thm1": _run_beta_bound,
    "fit": _run_fit,
    "thm2": _run_inverse,
    "thm3": lambda i, p, s, c: _run_k1(i, p, s, c, log_n=False),
    "thm4": lambda i, p, s, c: _run_k1(i, p, s, c, log_n=True),
    "beta": _run_beta,
    "plant": _run_plant,
}


def execute(command: str, inputs: Dict[str, str], params: Dict[str, Any], seed: Optional[int] = None,
            settings: Optional[SmallballConfig] = None) -> Outcome:
    """
    Run one non-sweep command.

    Raises:
        InvalidParameterError: On an unknown command or missing parameters
        SmallballError: On computation failures
    """
    settings = settings or SmallballConfig()
    if command == "smooth":
        return _run_smooth(inputs, params, seed, settings)
    if command not in _HANDLERS:
        raise InvalidParameterError(f"unknown command {command!r}")
    result = _HANDLERS[command](inputs, params, seed, settings)
    return Outcome(result.model_dump(mode="json"), _rows(result))


def sweep_cells(grid: Dict[str, List[Any]]) -> List[Dict[str, Any]]:
    """Cartesian product of the grid axes, in axis order with the last axis varying fastest."""
    axes = list(grid)
    return [dict(zip(axes, values)) for values in product(*(grid[k] for k in axes))]


def _run_cell(config: ExperimentConfig, index: int, cell: Dict[str, Any],
              settings: SmallballConfig) -> List[Dict[str, Any]]:
    operation = config.params["operation"]
    params = {k: v for k, v in config.params.items() if k != "operation"}
    params.update(cell)
    seed = derive_seed(config.seed, index) if config.seed is not None else None
    outcome = execute(operation, config.inputs, params, seed, settings)
    echo = json.dumps(to_jsonable({**params, "seed": seed}), sort_keys=True)
    rows = []
    for row in outcome.rows:
        rows.append({"cell": index, "operation": operation, **cell, **row, "params": echo})
    return rows


async def run_sweep_async(config: ExperimentConfig, threads: Optional[int] = None,
                          settings: Optional[SmallballConfig] = None) -> List[Dict[str, Any]]:
    """
    Run every sweep cell and return the long-form rows in cell order.

    Cells run in batches of `threads` (SMALLBALL_THREADS by default).
    """
    settings = settings or SmallballConfig()
    threads = threads or settings.threads
    cells = sweep_cells(config.grid)
    loop = asyncio.get_running_loop()
    rows: List[Dict[str, Any]] = []

    logger.info("sweeping %d cells of %s with %d threads", len(cells), config.params["operation"], threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # Process in batches to bound the number of pending cells
        for start in range(0, len(cells), threads):
            batch = [
                loop.run_in_executor(pool, _run_cell, config, i, cells[i], settings)
                for i in range(start, min(start + threads, len(cells)))
            ]
            for cell_rows in await asyncio.gather(*batch):
                rows.extend(cell_rows)
    return rows


def run_sweep(config: ExperimentConfig, threads: Optional[int] = None,
              settings: Optional[SmallballConfig] = None) -> List[Dict[str, Any]]:
    """Synchronous entry point for sweeps."""
    return asyncio.run(run_sweep_async(config, threads, settings))


def row_fields(config: ExperimentConfig) -> List[str]:
    """CSV header for a sweep: cell, operation, the grid axes, then the long-form columns."""
    return ["cell", "operation", *config.grid, "inequality_id", "quantity", "value", "params"]
