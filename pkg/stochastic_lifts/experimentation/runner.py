"""Command execution: each command fills a report with verdicts and the values behind them."""

import itertools
import json
import logging
import time
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..augmented.cells import CellDecomposition, CellFixture, audit_cells, cell_fixtures, centre_table
from ..augmented.comparison import compare_pc_aug
from ..augmented.relations import Variant, default_sources, max_delta, relation_counts, relation_dominates
from ..bk.events import Event, parse_min_terms
from ..bk.inequalities import bk_sweep, check_bk, two_arm_check
from ..config import get_settings
from ..core.coupling import is_monotone_coupling
from ..core.domination import dominates, domination_by_up_sets
from ..core.measure import FiniteMeasure, Space, format_fraction
from ..core.serialization import coupling_to_dict, measure_from_dict
from ..counterexamples.fixtures import VERIFIERS
from ..errors import AssumptionError, FixtureRegressionError, InputError, InvariantViolation, LiftError
from ..lift.fibre import FibreMap, load_fibre_map
from ..lift.main_coupling import build_main_coupling
from ..lift.multilift import MultiliftEnvironment, deterministic_pair_strategies, multilift_domination
from ..lift.one_column import one_column_coupling
from ..lift.random_instances import bernoulli_lift_verdicts, random_main_instance, random_one_column_instance
from ..percolation.estimation import (
    compare_exact,
    compare_fibre_selection_exact,
    compare_fibre_selection_mc,
    compare_mc,
    estimate_pc,
)
from ..percolation.generators import cycle_product, fixture_pairs, graph_from_spec
from ..percolation.graph import read_graph
from ..percolation.sampling import Mode
from .config import ExperimentConfig
from .report import Report, jsonable

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

PERCOLATION_GRID = [Fraction(k, 10) for k in range(1, 10)]
LAKON_GRID = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
MULTILIFT_GRID = [Fraction(1, 4), Fraction(1, 2)]
DELTA_S_GRID = [Fraction(1, 4), Fraction(1, 2), Fraction(1)]


def _fmt(p: Fraction) -> str:
    return format_fraction(p)


def _load_graph(spec: str):
    """A "name:args" generator string, or a path to a graph file."""
    if ":" in spec:
        return graph_from_spec(spec)
    return read_graph(spec)


def _cell_inputs(config: ExperimentConfig, default: str = "all") -> Dict[str, CellFixture]:
    if config.graph:
        centres = tuple(config.centres) if config.centres is not None else None
        return {config.graph: CellFixture(_load_graph(config.graph), config.r0, centres, config.c)}
    fixtures = cell_fixtures()
    name = config.fixture if config.fixture != "all" else default
    if name == "all":
        return fixtures
    if name not in fixtures:
        raise InputError(f"Unknown cell fixture {name!r}; known: {sorted(fixtures)}")
    return {name: fixtures[name]}


def run_verify(config: ExperimentConfig, report: Report) -> None:
    names = list(VERIFIERS) if config.fixture in ("all", "counterexamples") else [config.fixture]
    for name in names:
        if name not in VERIFIERS:
            raise InputError(f"Unknown fixture {name!r}; known: {sorted(VERIFIERS)}")
        try:
            result = VERIFIERS[name]()
        except FixtureRegressionError as e:
            report.record(name, False, {"error": str(e)})
            continue
        report.record(name, result.passed, result.checks)


def _read_instance(path: str, fibre_map: Optional[str] = None) -> Tuple[FiniteMeasure, FiniteMeasure, FibreMap]:
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Cannot read instance {path}: {e}") from e
    try:
        pm = load_fibre_map(fibre_map) if fibre_map else FibreMap.from_dict(data["pm"])
        return measure_from_dict(data["mu"]), measure_from_dict(data["rho"]), pm
    except (KeyError, TypeError) as e:
        raise InputError(f"Instance {path} needs mu, rho and pm: {e}") from e


def run_coupling(config: ExperimentConfig, report: Report) -> None:
    if not config.instance:
        raise InputError("coupling needs an instance file")
    mu, rho, pm = _read_instance(config.instance, config.fibre_map)
    try:
        coupling = build_main_coupling(mu, rho, pm)
    except AssumptionError as e:
        report.record("main_coupling", False, {"assumption": e.assumption, "witness": e.witness})
        return
    report.record("main_coupling", is_monotone_coupling(coupling, mu, rho), coupling_to_dict(coupling))
    report.record("dominates", dominates(mu, rho).holds)


def _fibre_shapes(max_columns: int, sizes: Sequence[int]) -> List[Tuple[int, ...]]:
    return [shape for k in range(1, max_columns + 1) for shape in itertools.product(sizes, repeat=k)]


def run_lakon_sweep(config: ExperimentConfig, report: Report) -> None:
    """Every deterministic section strategy against i.i.d. Bernoulli labels, then the paired version."""
    grid = config.p or LAKON_GRID
    for shape in _fibre_shapes(2, range(1, config.max_fibre + 1)):
        pm = FibreMap.from_fibre_sizes(shape)
        for p in grid:
            strategies = failures = 0
            for _, holds in bernoulli_lift_verdicts(pm, p):
                strategies += 1
                failures += not holds
            row = {"fibres": list(shape), "p": _fmt(p), "strategies": strategies, "failures": failures}
            report.rows.append(row)
            report.record(f"lift {shape} p={_fmt(p)}", failures == 0, row)

    for shape in _fibre_shapes(2, range(2, config.max_fibre + 1)):
        pm = FibreMap.from_fibre_sizes(shape)
        adaptive = len(shape) == 1
        for p in [q for q in (config.p or MULTILIFT_GRID) if 0 < q < 1]:
            checked, failures = 0, []
            for strategy in deterministic_pair_strategies(pm, adaptive=adaptive):
                result = multilift_domination(MultiliftEnvironment.deterministic(pm, p, strategy), pm, p)
                checked += 1
                if not result.holds:
                    failures.append(result.failures[:1] or [result.violator])
            report.record(
                f"multilift {shape} p={_fmt(p)}",
                not failures,
                {"strategies": checked, "adaptive": adaptive, "failures": failures[:5]},
            )


def run_perco_compare(config: ExperimentConfig, report: Report) -> None:
    pairs = fixture_pairs()
    if config.pair:
        if config.pair not in pairs:
            raise InputError(f"Unknown fixture pair {config.pair!r}; known: {sorted(pairs)}")
        pairs = {config.pair: pairs[config.pair]}
    grid = config.p or PERCOLATION_GRID
    radii = config.radii or [1, 2]
    for name, (vm, x) in pairs.items():
        rows = compare_exact(vm, x, radii, grid)
        report.record(f"exact {name}", all(row.holds for row in rows), rows)
        report.rows.extend({"pair": name, "method": "exact", **jsonable(row)} for row in rows)
        if all(len(fibre) == 2 for fibre in vm.fibres):
            selection = compare_fibre_selection_exact(vm, x, radii)
            report.record(f"fibre_selection {name}", all(row.holds for row in selection), selection)
        if config.trials and config.radius:
            mc_rows = [
                compare_mc(vm, x, config.radius, float(p), config.trials, config.seed, jobs=config.jobs)
                for p in grid
            ]
            report.record(f"mc {name}", all(row.holds for row in mc_rows), mc_rows)
            report.rows.extend({"pair": name, "method": "mc", **jsonable(row)} for row in mc_rows)
            if all(len(fibre) == 2 for fibre in vm.fibres):
                selection_mc = compare_fibre_selection_mc(
                    vm, x, config.radius, config.trials, config.seed, jobs=config.jobs
                )
                report.record(f"fibre_selection_mc {name}", selection_mc.holds, selection_mc)


def run_cells(config: ExperimentConfig, report: Report) -> None:
    for name, fixture in _cell_inputs(config).items():
        try:
            cd = fixture.build()
        except InvariantViolation as e:
            report.record(f"audit {name}", False, {"error": str(e)})
            continue
        violations = audit_cells(cd)
        report.record(f"audit {name}", not violations, {
            "cells": len(cd.cells),
            "centres": list(cd.centres),
            "r": cd.r,
            "R": cd.R,
            "clipped": sorted(cd.clipped),
            "violations": violations,
        })
        if config.dump_cells:
            report.results[f"cells {name}"] = cd.to_dict()
            report.rows.extend({"fixture": name, **row} for row in centre_table(cd))


def _delta_cell(report: Report, name: str, cd: CellDecomposition, index: int, p_grid, s_grid) -> None:
    cell = cd.cells[index]
    counts = relation_counts(cd, cell, default_sources(cell))
    for p in p_grid:
        plain = counts.law(p)
        for s in s_grid:
            label = f"{name} cell {cell.centre} p={_fmt(p)} s={_fmt(s)}"
            augmented = counts.law(p, s, Variant.AUGMENTED)
            report.record(f"no-gain {label}", relation_dominates(plain, augmented))
            try:
                delta = max_delta(cd, cell, p, s, counts=counts)
            except InvariantViolation as e:
                report.record(f"delta {label}", False, {"error": str(e)})
                continue
            row = {"fixture": name, "centre": cell.centre, "p": _fmt(p), "s": _fmt(s), "delta": _fmt(delta)}
            report.rows.append(row)
            report.record(f"delta {label}", delta > 0 or not (0 < p < 1 and s > 0), row)


def run_delta(config: ExperimentConfig, report: Report) -> None:
    p_grid = config.p or LAKON_GRID
    s_grid = config.s or DELTA_S_GRID
    for name, fixture in _cell_inputs(config).items():
        cd = fixture.build()
        for index in range(len(cd.cells)):
            _delta_cell(report, name, cd, index, p_grid, s_grid)


def run_aug_compare(config: ExperimentConfig, report: Report) -> None:
    if not config.p:
        raise InputError("aug-compare needs a p grid")
    if config.trials < 1:
        raise InputError("aug-compare needs a positive trial count")
    inputs = _cell_inputs(config, default="torus12")
    if len(inputs) != 1:
        raise InputError("aug-compare runs on a single graph")
    (name, fixture), = inputs.items()
    s = config.s[0] if config.s else Fraction(1)
    comparison = compare_pc_aug(
        fixture.graph,
        fixture.r0,
        config.p,
        s,
        config.radius if config.radius is not None else 8,
        config.trials,
        config.seed,
        c=fixture.floor_switch,
        centres=fixture.centres,
        jobs=config.jobs,
    )
    report.results["comparison"] = jsonable(comparison.to_dict())
    for row in comparison.rows:
        report.rows.append({"fixture": name, **jsonable(row)})
        report.record(f"coupled p={row.p} s={row.s}", row.holds)
    if s == 1 and comparison.rows:
        widest = max(row.gap_in_errors for row in comparison.rows)
        report.record("gap s=1", widest > 3, {"max_gap_in_errors": widest})


def _event(text: str, n: int) -> Event:
    if text.lower().startswith("0x"):
        return Event.from_hex(n, text)
    return Event.from_min_terms(n, parse_min_terms(text))


def run_bk(config: ExperimentConfig, report: Report) -> None:
    grid = config.p or [Fraction(1, 2)]
    if config.exhaustive is not None:
        for p in grid:
            sweep = bk_sweep(config.exhaustive, p)
            report.record(f"exhaustive n={config.exhaustive} p={_fmt(p)}", sweep.holds, sweep)
        return
    if config.graph:
        g = _load_graph(config.graph)
        radius = config.radius if config.radius is not None else 1
        for p in grid:
            arms = two_arm_check(g, 0, radius, p)
            report.record(f"two_arm p={_fmt(p)}", arms.holds, arms.to_dict())
        return
    if not (config.e1 and config.e2 and config.n is not None):
        raise InputError("bk needs --e1, --e2 and --n, --exhaustive, or --graph")
    e1, e2 = _event(config.e1, config.n), _event(config.e2, config.n)
    for p in grid:
        result = check_bk(e1, e2, p)
        report.record(f"bk p={_fmt(p)}", result.holds, result.to_dict())


def run_cycles(config: ExperimentConfig, report: Report) -> None:
    """Threshold proxies on products with cycles; exploratory, nothing is asserted."""
    g = _load_graph(config.graph or "box:3,3")
    radius = config.radius if config.radius is not None else 4
    trials = config.trials or 1000
    lo, hi = estimate_pc(g, Mode.BOND, 0, radius, trials, config.seed, jobs=config.jobs)
    report.rows.append({"m": 0, "lo": lo, "hi": hi})
    for m in config.cycle_lengths or [3, 4, 5, 6]:
        product, _ = cycle_product(g, m)
        lo, hi = estimate_pc(product, Mode.BOND, 0, radius, trials, config.seed, jobs=config.jobs)
        report.rows.append({"m": m, "lo": lo, "hi": hi})
    report.results["cycles"] = {"graph": config.graph or "box:3,3", "radius": radius, "trials": trials}


def _y_law(law, width: int, label_bound: int) -> FiniteMeasure:
    weights: Dict = {}
    for (value, position), w in law.items():
        y = [0] * width
        if value:
            y[position] = value
        weights[tuple(y)] = weights.get(tuple(y), Fraction(0)) + w
    return FiniteMeasure.from_weights(Space(width, label_bound), weights)


def run_properties(config: ExperimentConfig, report: Report) -> None:
    """Random main-coupling instances, half of them on raw targets, then ten times as many one-column instances."""
    rng = np.random.default_rng(config.seed)
    cap = get_settings().up_set_oracle_cap
    failures, oracle_checked, oracle_disagree = [], 0, 0
    for i in range(config.instances):
        inst = random_main_instance(
            rng, max_fibre=config.max_fibre, max_label=1 if i % 2 else 2, exchangeable=(i // 2) % 2 == 0
        )
        coupling = build_main_coupling(inst.mu, inst.rho, inst.pm)
        verdict = dominates(inst.mu, inst.rho)
        if not (is_monotone_coupling(coupling, inst.mu, inst.rho) and verdict.holds):
            failures.append(i)
        if inst.mu.space.size <= cap:
            oracle_checked += 1
            oracle_disagree += domination_by_up_sets(inst.mu, inst.rho) != verdict.holds
    report.record("main_coupling", not failures, {"instances": config.instances, "failures": failures[:10]})
    report.record("oracle", oracle_disagree == 0, {"checked": oracle_checked, "disagreements": oracle_disagree})

    bad = []
    for i in range(10 * config.instances):
        width, label_bound = int(rng.integers(1, 4)), int(rng.integers(1, 3))
        law, rho = random_one_column_instance(rng, width, label_bound)
        coupling = one_column_coupling(law, rho)
        if not is_monotone_coupling(coupling, _y_law(law, width, label_bound), rho):
            bad.append(i)
    report.record("one_column", not bad, {"instances": 10 * config.instances, "failures": bad[:10]})


COMMANDS: Dict[str, Callable[[ExperimentConfig, Report], None]] = {
    "verify": run_verify,
    "coupling": run_coupling,
    "lakon-sweep": run_lakon_sweep,
    "perco-compare": run_perco_compare,
    "cells": run_cells,
    "delta": run_delta,
    "aug-compare": run_aug_compare,
    "bk": run_bk,
    "cycles": run_cycles,
    "properties": run_properties,
}


def run(config: ExperimentConfig) -> Tuple[Report, int]:
    """Execute one command.

    Returns:
        The report and the exit code: 0 when every check holds, 1 when a
        mathematical check fails, 2 on bad input
    """
    report = Report(command=config.command, config=config.echo())
    start = time.perf_counter()
    try:
        COMMANDS[config.command](config, report)
        code = EXIT_OK if report.passed else EXIT_FAILED
    except InputError as e:
        logger.error(f"{config.command}: {e}")
        report.passed, report.error, code = False, str(e), EXIT_INPUT
    except LiftError as e:
        logger.error(f"{config.command}: {e}")
        report.passed, report.error, code = False, str(e), EXIT_FAILED
    elapsed = time.perf_counter() - start
    logger.info(f"{config.command} finished in {elapsed:.2f}s with exit code {code}")
    if config.timing:
        report.wall_time = round(elapsed, 3)
    return report, code
