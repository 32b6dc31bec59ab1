"""Monte Carlo estimation of expected selected indegree and theory curves."""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.analysis import guarantee_pair
from src.core.graph_core import max_k_indegree, prediction_error, set_indegree
from src.core.mechanisms import check_compatible, run_mechanism
from src.data.models import (
    CurveRow,
    EvalReport,
    GuaranteeKind,
    InstanceResult,
    MechanismSpec,
    NominationGraph,
    Prediction,
    TrialConfig,
    rational_param,
)
from src.utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)

Instance = Tuple[str, NominationGraph, Prediction]

_RHO_GUARANTEES = {GuaranteeKind.RHO_PERMUTATION, GuaranteeKind.PLURALITY_MIXTURE,
                   GuaranteeKind.RANDOMIZED_K2_MIXTURE, GuaranteeKind.RHO_PARTITION}
_K_GUARANTEES = {GuaranteeKind.DET_K, GuaranteeKind.RHO_PARTITION,
                 GuaranteeKind.K_PARTITION_BASELINE, GuaranteeKind.TRIVIAL_PREDICTED}


def derive_stream(seed: int, *indices: int) -> np.random.Generator:
    """Independent generator for (seed, index, ...)"""
    return np.random.default_rng(np.random.SeedSequence([seed, *indices]))


def hoeffding_half_width(trials: int, delta_k: int, confidence: Optional[float] = None) -> float:
    """Half-width of the two-sided Hoeffding interval for a mean of [0, delta_k] draws"""
    if confidence is None:
        confidence = ConfigManager().get_config("evaluation").confidence
    return math.sqrt(math.log(2 / confidence) / (2 * trials)) * delta_k


def _sum_trials(spec: MechanismSpec, g: NominationGraph, p: Prediction, seed: int,
                start: int, stop: int) -> int:
    return sum(set_indegree(g, run_mechanism(spec, g, p, derive_stream(seed, trial)))
               for trial in range(start, stop))


def _chunks(trials: int, workers: int) -> List[Tuple[int, int]]:
    size = math.ceil(trials / workers)
    return [(start, min(start + size, trials)) for start in range(0, trials, size)]


def monte_carlo_expected_indegree(spec: MechanismSpec, g: NominationGraph, p: Prediction,
                                  trials: int, seed: int,
                                  workers: int = 1) -> Tuple[float, float]:
    """Mean selected indegree over independent draws and its Hoeffding half-width"""
    if not isinstance(trials, int) or trials < 1:
        raise ValueError("trials must be at least 1.")
    check_compatible(spec, g, p)

    if spec.is_deterministic:
        return float(_sum_trials(spec, g, p, seed, 0, 1)), 0.0

    if workers > 1 and trials > 1:
        chunks = _chunks(trials, workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            totals = pool.map(_sum_trials, *zip(*[(spec, g, p, seed, a, b) for a, b in chunks]))
            total = sum(totals)
    else:
        total = _sum_trials(spec, g, p, seed, 0, trials)

    delta_k, _ = max_k_indegree(g, spec.k)
    return total / trials, hoeffding_half_width(trials, delta_k)


def _evaluate_instance(spec: MechanismSpec, trials: int, seed: int, instance: Instance) -> InstanceResult:
    instance_id, g, p = instance
    delta_k, _ = max_k_indegree(g, spec.k)
    mean, ci = monte_carlo_expected_indegree(spec, g, p, trials, seed)
    return InstanceResult(instance_id=instance_id, n=g.n, k=p.k, delta_k=delta_k,
                          pred_indegree=set_indegree(g, p.vertices),
                          eta=prediction_error(g, p), mean=mean, ci=ci)


def run_suite(cfg: TrialConfig, instances: Sequence[Instance], workers: Optional[int] = None) -> EvalReport:
    """Evaluate every instance; rows keep the instance order"""
    if not instances:
        raise ValueError("instance list must not be empty.")
    if workers is None:
        workers = ConfigManager().get_config("evaluation").workers
    for _, g, p in instances:
        check_compatible(cfg.spec, g, p)

    if workers > 1 and len(instances) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate_instance, [cfg.spec] * len(instances),
                                 [cfg.trials] * len(instances), [cfg.seed] * len(instances), instances))
    else:
        rows = [_evaluate_instance(cfg.spec, cfg.trials, cfg.seed, inst) for inst in instances]

    report = EvalReport(spec_label=cfg.spec.label(), trials=cfg.trials, seed=cfg.seed, rows=rows)
    logger.info("suite %s over %d instances: alpha_hat=%s beta_hat=%.4f", report.spec_label,
                len(rows), report.alpha_hat, report.beta_hat)
    return report


def emit_curves(kind_set: Iterable[GuaranteeKind], k_range: Iterable[int],
                rho_set: Iterable) -> List[CurveRow]:
    """Theory rows (kind, k, rho, alpha, beta) for every combination"""
    k_values = list(k_range)
    rho_values = [rational_param(rho, "rho") for rho in rho_set]
    if not k_values or not rho_values:
        raise ValueError("k range and rho set must not be empty.")
    rows = []
    for kind in kind_set:
        kind = GuaranteeKind(kind)
        for k in k_values:
            for rho in rho_values:
                pair = guarantee_pair(kind,
                                      rho=rho if kind in _RHO_GUARANTEES else None,
                                      k=k if kind in _K_GUARANTEES else None)
                rows.append(CurveRow(kind=kind, k=k, rho=rho, alpha=pair.alpha, beta=pair.beta))
    return rows
