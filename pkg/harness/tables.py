"""
Relaxation sweep over random mixed 0-1 SOCPs: optimal values and solve times
of the SDP, ZVP, NN and BD relaxations of the Burer lift next to the
brute-force MISOCP optimum.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

from bdsep.models import TrsError
from conicsolver.models import OPTIMAL, SolverError, SolverOptions
from gcpp.bruteforce import misocp_bruteforce
from gcpp.burer import burer_reformulate
from gcpp.models import BD, MISOCP, NN, RELAXATIONS, SDP, ZVP, ExchangeError, ExchangeParams
from gcpp.relaxations import solve_relaxation
from harness.instances import generate_instance
from harness.models import (
    CRITICAL, DEFAULT_WORKERS, FAILED, INFO, NN_MAX_N, RELAXATION_MAX_N, SKIPPED, WARNING,
    ExperimentReport,
)

logger = logging.getLogger(__name__)

ORDER_TOL = 1e-5
KKT_TOL = 1e-6
COLUMNS = [MISOCP, NN, ZVP, BD, SDP]


def _cap(variant: str, n: int) -> Optional[int]:
    if n > RELAXATION_MAX_N:
        return RELAXATION_MAX_N
    if variant == NN and n > NN_MAX_N:
        return NN_MAX_N
    return None


def _cell(value=math.nan, seconds=math.nan, status=OPTIMAL, **extra) -> Dict:
    return {"value": value, "time": seconds, "status": status, **extra}


def _solve_misocp(inst, opts) -> Dict:
    start = time.perf_counter()
    try:
        value, _ = misocp_bruteforce(inst, opts)
    except (SolverError, ValueError) as exc:
        return _cell(status=FAILED, message=str(exc))
    return _cell(float(value), time.perf_counter() - start)


def _solve_variant(g, variant: str, opts, params) -> Dict:
    try:
        res = solve_relaxation(g, variant, opts=opts, params=params)
    except (SolverError, ExchangeError, TrsError, np.linalg.LinAlgError) as exc:
        logger.warning("%s failed on %s: %s", variant, g.instance and g.instance.seed, exc)
        return _cell(status=FAILED, message=str(exc))
    extra = {"kkt": res.kkt} if res.kkt else {}
    if res.trace is not None:
        extra["cuts"] = len(res.trace.entries)
        extra["fallback_seeded"] = res.trace.fallback_seeded
    return _cell(res.value, res.time, res.status, **extra)


def _run_instance(n: int, no: int, seed: int, variants: Sequence[str],
                  opts: Optional[SolverOptions], params: Optional[ExchangeParams]) -> Dict:
    inst_seed = seed + no
    inst = generate_instance(n, inst_seed)
    g = burer_reformulate(inst)
    record = {"n": n, "no": no, "seed": inst_seed, MISOCP: _solve_misocp(inst, opts)}
    for variant in variants:
        cap = _cap(variant, n)
        if cap is not None:
            record[variant] = _cell(status=SKIPPED, message=f"n={n} exceeds cap {cap}")
            continue
        record[variant] = _solve_variant(g, variant, opts, params)
    logger.info("tables: n=%d no=%d done", n, no)
    return record


def _value(record: Dict, variant: str) -> Optional[float]:
    cell = record.get(variant)
    if not cell or cell["status"] != OPTIMAL or not np.isfinite(cell["value"]):
        return None
    return cell["value"]


def _check_orderings(report: ExperimentReport, record: Dict):
    tag = f"n={record['n']} no={record['no']}"
    best = _value(record, MISOCP)
    tol = ORDER_TOL * max(1.0, abs(best)) if best is not None else ORDER_TOL
    sdp, zvp, nn, bd = (_value(record, v) for v in (SDP, ZVP, NN, BD))

    if best is not None:
        for variant, value in ((ZVP, zvp), (NN, nn), (BD, bd)):
            if value is not None and value > best + tol:
                report.add_finding(CRITICAL, "sandwich",
                                   f"{tag}: {variant} bound {value:.6g} exceeds MISOCP {best:.6g}")
    if zvp is not None and nn is not None and zvp > nn + tol:
        report.add_finding(CRITICAL, "sandwich", f"{tag}: ZVP {zvp:.6g} exceeds NN {nn:.6g}")
    if sdp is not None:
        for variant, value in ((ZVP, zvp), (BD, bd)):
            if value is not None and sdp > value + tol:
                report.add_finding(CRITICAL, "sandwich",
                                   f"{tag}: SDP {sdp:.6g} above {variant} {value:.6g}")
    if bd is not None and nn is not None:
        relation = "<=" if bd <= nn + tol else ">"
        report.add_finding(INFO, "bd-vs-nn", f"{tag}: BD {bd:.6g} {relation} NN {nn:.6g}")
    for variant in (SDP, ZVP, NN):
        kkt = (record.get(variant) or {}).get("kkt") or {}
        worst = max((abs(v) for v in kkt.values() if v is not None), default=0.0)
        if worst > KKT_TOL:
            report.add_finding(WARNING, "kkt", f"{tag}: {variant} KKT residual {worst:.2e}")


def run_tables(n_list: Sequence[int], seeds_per_n: int = 5, variants: Sequence[str] = RELAXATIONS,
               seed: int = 0, workers: int = DEFAULT_WORKERS, opts: Optional[SolverOptions] = None,
               params: Optional[ExchangeParams] = None) -> ExperimentReport:
    for variant in variants:
        if variant not in RELAXATIONS:
            raise ValueError(f"unknown relaxation '{variant}'")
    jobs = [(n, no) for n in n_list for no in range(seeds_per_n)]
    logger.info("tables: %d instances, variants %s, %d workers", len(jobs), list(variants), workers)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda job: _run_instance(*job, seed, variants, opts, params), jobs))
    else:
        records = [_run_instance(n, no, seed, variants, opts, params) for n, no in jobs]
    records.sort(key=lambda r: (r["n"], r["seed"]))

    report = ExperimentReport(
        id=f"tables-{seed}-{'_'.join(map(str, n_list))}-{seeds_per_n}",
        kind="tables",
        seed=seed,
        records=records,
        params={"n_list": list(n_list), "seeds_per_n": seeds_per_n, "variants": list(variants)},
    )
    for record in records:
        _check_orderings(report, record)

    summary: Dict[str, Dict] = {}
    for n in sorted(set(n_list)):
        rows = [r for r in records if r["n"] == n]
        per_n = {}
        for variant in COLUMNS:
            cells = [r[variant] for r in rows if variant in r]
            if not cells:
                continue
            times = [c["time"] for c in cells if c["status"] == OPTIMAL]
            per_n[variant] = {
                "solved": len(times),
                "skipped": sum(c["status"] == SKIPPED for c in cells),
                "failed": sum(c["status"] == FAILED for c in cells),
                "mean_time": float(np.mean(times)) if times else None,
            }
        tight: List[bool] = []
        for r in rows:
            best, zvp = _value(r, MISOCP), _value(r, ZVP)
            if best is not None and zvp is not None:
                tight.append(abs(best - zvp) <= ORDER_TOL * max(1.0, abs(best)))
        if tight:
            per_n["zvp_tight"] = sum(tight)
            report.add_finding(INFO, "zvp-tightness", f"n={n}: ZVP tight on {sum(tight)} of {len(tight)} instances")
        summary[str(n)] = per_n
    report.summary = summary
    return report
