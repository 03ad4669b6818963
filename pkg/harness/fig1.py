import logging
from typing import Optional

import numpy as np

from bdsep.models import NNO_NNO, NNO_SOC, SOC_NNO, SOCSOC_LINEAR
from bdsep.oracle import separate, socsoc_objective
from bdsep.trs import solve_trs
from gdnn.c0 import nn_c0
from gdnn.examples import soc_spec
from harness.instances import sample_m44_vectors, untied_classes
from harness.models import CRITICAL, INFO, WARNING, ExperimentReport

logger = logging.getLogger(__name__)

NEGATIVE_TOL = -1e-6
LINEAR_CASES = [NNO_NNO, NNO_SOC, SOC_NNO, SOCSOC_LINEAR]


def _summary(values: np.ndarray) -> dict:
    if values.size == 0:
        return {"min": None, "median": None, "max": None, "negatives": 0}
    return {
        "min": float(values.min()),
        "median": float(np.median(values)),
        "max": float(values.max()),
        "negatives": int(np.sum(values < NEGATIVE_TOL)),
    }


def run_fig1(count: int = 1000, seed: int = 0, max_draws: Optional[int] = None) -> ExperimentReport:
    """TRS phase values of the BD separation at C₀ images of sampled moment vectors, on R₊ × L³."""
    report = ExperimentReport(id=f"fig1-{seed}-{count}", kind="fig1", seed=seed,
                              params={"count": count, "max_draws": max_draws})
    bad = untied_classes()
    if bad:
        report.add_finding(CRITICAL, "moment-tying",
                           f"{len(bad)} moment classes stay untied after the assignments: {bad}")

    spec = soc_spec(1, 3)
    samples, draws = sample_m44_vectors(count, seed, max_draws=max_draws)
    logger.info("fig1: %d samples accepted from %d draws", len(samples), draws)

    trs_values, linear_min = [], []
    for k, y in enumerate(samples):
        X = nn_c0(spec, y.y)
        trs = solve_trs(socsoc_objective(spec, X, 1, 1)).value / 4.0
        cases = separate(spec, X).case_values
        linear = {name: cases.get(name) for name in LINEAR_CASES}
        present = [v for v in linear.values() if v is not None]
        trs_values.append(trs)
        linear_min.append(min(present) if present else np.inf)
        report.records.append({"sample": k, "trs": trs, **linear})

    trs_arr = np.array(trs_values)
    lin_arr = np.array(linear_min)
    report.summary = {
        "accepted": len(samples),
        "draws": draws,
        "acceptance_rate": len(samples) / draws if draws else 0.0,
        "trs": _summary(trs_arr),
        "linear": _summary(lin_arr[np.isfinite(lin_arr)]),
    }

    if len(samples) < count:
        report.add_finding(WARNING, "sampling", f"only {len(samples)} of {count} samples accepted")
    negatives = report.summary["trs"]["negatives"]
    if negatives:
        report.add_finding(CRITICAL, "trs-sign", f"{negatives} TRS values below {NEGATIVE_TOL}")
    else:
        report.add_finding(INFO, "trs-sign", "every TRS value is nonnegative")
    if report.summary["linear"]["negatives"]:
        report.add_finding(CRITICAL, "linear-sign",
                           f"{report.summary['linear']['negatives']} samples with a negative linear case")
    return report
