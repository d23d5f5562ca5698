"""Full direction-projection-permutation test orchestration.

Fits the observed direction, re-fits the classifier on B permuted
relabelings (in parallel across a worker pool), and summarizes the
permutation null distribution with a p-value, z-score, and empirical
critical value.

Null hypothesis: the two classes are draws from one distribution; it is
rejected when the observed projected separation is extreme against the
re-fit permutation distribution.
"""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset
from .direction import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    Direction,
    DwdModel,
    Loading,
    _dwd_arrays,
    _md_arrays,
    loadings_of,
    penalty_parameter,
)
from .errors import EmptyError, NonConvergedError, ValidationError, ZeroVarianceError
from .permute import SCHEMES, PermutationPlan, derive_stream, permute_labels
from .unistat import STATISTICS, ProjectionScores

log = logging.getLogger(__name__)

CLASSIFIERS = ("dwd", "md")
SCORE_PANELS = ("obs", "min", "max", "perm1", "perm2")
PANELS = SCORE_PANELS + ("permdist",)


@dataclass(frozen=True)
class TestConfig:
    """Everything needed to reproduce a run (with the same data)."""

    classifier: str = "dwd"
    statistic: str = "md"
    scheme: str = "balanced"
    B: int = 1000
    seed: int = 0
    alpha: float = 0.05


@dataclass(eq=False)
class PermutationRecord:
    """One permutation's relabeling, re-fit projection scores, and statistic."""

    perm_index: int
    permuted_labels: np.ndarray
    scores: ProjectionScores
    statistic: float


@dataclass(eq=False)
class DppResult:
    config: TestConfig
    observed_direction: Direction
    observed_scores: ProjectionScores
    observed_statistic: float
    loadings: list[Loading]
    perm_statistics: np.ndarray
    records: dict[int, PermutationRecord]
    p_value: float
    z_score: float
    cutoff: float
    observed_model: DwdModel | None = None
    feature_names: tuple[str, ...] | None = None

    @property
    def min_index(self) -> int:
        """1-based index of the permutation with the smallest statistic."""
        return int(np.argmin(self.perm_statistics)) + 1

    @property
    def max_index(self) -> int:
        return int(np.argmax(self.perm_statistics)) + 1

    def panel_index(self, panel: str) -> int:
        return {"perm1": 1, "perm2": 2, "min": self.min_index,
                "max": self.max_index}[panel]

    def record_for_panel(self, panel: str) -> PermutationRecord | None:
        """The retained record backing a score panel, or None if dropped."""
        return self.records.get(self.panel_index(panel))


def p_value(perm_stats, observed: float) -> float:
    """Proportion of permutation statistics at or above the observed one."""
    stats = np.asarray(perm_stats, dtype=np.float64)
    if stats.size == 0:
        raise EmptyError("no permutation statistics")
    return float((stats >= observed).sum()) / stats.size


def z_score(perm_stats, observed: float) -> float:
    """Observed statistic standardized against the permutation distribution."""
    stats = np.asarray(perm_stats, dtype=np.float64)
    if stats.size < 2:
        raise EmptyError("z-score needs at least 2 permutation statistics")
    sd = float(stats.std(ddof=1))
    if sd <= 0.0:
        raise ZeroVarianceError("permutation statistics are constant")
    return (float(observed) - float(stats.mean())) / sd


def cutoff(perm_stats, alpha: float) -> float:
    """Empirical critical value: the ceil((1-alpha)*B)-th order statistic."""
    stats = np.asarray(perm_stats, dtype=np.float64)
    if stats.size == 0:
        raise EmptyError("no permutation statistics")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    rank = math.ceil((1.0 - alpha) * stats.size - 1e-9)
    rank = min(max(rank, 1), stats.size)
    return float(np.sort(stats)[rank - 1])


# Worker-side state, installed once per process by _init_state.
_STATE: dict = {}


def _init_state(features, labels, classifier, statistic, scheme, seed, C,
                tol, max_iter, keep_scores_upto, keep_all):
    _STATE.update(
        features=features, labels=labels, classifier=classifier,
        statistic=statistic, scheme=scheme, seed=seed, C=C, tol=tol,
        max_iter=max_iter, keep_scores_upto=keep_scores_upto,
        keep_all=keep_all,
    )


def _fit_direction(X, y, classifier, C, tol, max_iter):
    if classifier == "md":
        return _md_arrays(X, y), None
    model = _dwd_arrays(X, y, C, tol, max_iter)
    return model.direction, model


def _one_permutation(b: int):
    """Stat (and optionally scores) for permutation b; pure in (state, b)."""
    st = _STATE
    t0 = time.perf_counter()
    stream = derive_stream(st["seed"], b)
    perm_y = permute_labels(st["labels"], st["scheme"], stream)
    try:
        direction, model = _fit_direction(
            st["features"], perm_y, st["classifier"], st["C"], st["tol"],
            st["max_iter"],
        )
    except NonConvergedError as err:
        raise NonConvergedError(
            err.iterations, err.kkt_residual, model=err.model, perm_index=b
        ) from None
    ps = ProjectionScores(
        st["features"] @ direction.w + direction.beta, perm_y
    )
    stat = STATISTICS[st["statistic"]](ps)
    telemetry = (model.iterations if model else 0, time.perf_counter() - t0)
    if st["keep_all"] or b <= st["keep_scores_upto"]:
        return stat, perm_y, ps.scores, telemetry
    return stat, None, None, telemetry


def diproperm(ds: LabeledDataset, plan: PermutationPlan | None = None,
              classifier: str = "dwd", statistic: str = "md",
              alpha: float = 0.05, workers: int | None = None,
              retain_all: bool = False, dwd_tol: float = DEFAULT_TOL,
              dwd_max_iter: int = DEFAULT_MAX_ITER) -> DppResult:
    """Run the full test and assemble a DppResult.

    The DWD penalty C is computed once from the observed data and reused
    for every permutation re-fit.  Permutations run on `workers`
    processes (default: all cores); results are bit-identical for any
    worker count because each permutation derives its own stream.
    A NonConvergedError on any re-fit aborts the run with that
    permutation's index; no permutation is silently dropped.
    """
    plan = plan or PermutationPlan()
    if classifier not in CLASSIFIERS:
        raise ValidationError(f"classifier must be one of {CLASSIFIERS}, got {classifier!r}")
    if statistic not in STATISTICS:
        raise ValidationError(f"statistic must be one of {tuple(STATISTICS)}, got {statistic!r}")
    if plan.scheme not in SCHEMES:
        raise ValidationError(f"scheme must be one of {SCHEMES}")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    if alpha * plan.B < 1.0:
        raise ValidationError(
            f"alpha*B = {alpha * plan.B:.3g} < 1: too few permutations for the cutoff"
        )
    workers = workers or os.cpu_count() or 1
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")

    X, y = ds.features, ds.labels
    if plan.scheme == "balanced":
        n_neg = int((y == -1).sum())
        n_pos = int((y == 1).sum())
        if n_neg - n_neg // 2 > n_pos:
            log.warning(
                "balanced half-and-half draw infeasible for class sizes "
                "(%d, %d); using the composition-matched relabeling",
                n_neg, n_pos,
            )
    C = penalty_parameter(ds) if classifier == "dwd" else None
    observed_direction, observed_model = _fit_direction(
        X, y, classifier, C, dwd_tol, dwd_max_iter
    )
    observed_scores = ProjectionScores(
        X @ observed_direction.w + observed_direction.beta, y
    )
    observed_statistic = STATISTICS[statistic](observed_scores)
    loadings = loadings_of(observed_direction, ds.n_features, ds.feature_names)

    state = (X, y, classifier, statistic, plan.scheme, plan.seed, C,
             dwd_tol, dwd_max_iter, 2, retain_all)
    indices = range(1, plan.B + 1)
    if workers == 1 or plan.B == 1:
        _init_state(*state)
        outputs = [_one_permutation(b) for b in indices]
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_state, initargs=state
        ) as pool:
            chunk = max(1, plan.B // (workers * 4))
            outputs = list(pool.map(_one_permutation, indices, chunksize=chunk))

    perm_statistics = np.array([o[0] for o in outputs], dtype=np.float64)
    perm_statistics.setflags(write=False)
    if log.isEnabledFor(logging.DEBUG):
        for b, out in enumerate(outputs, start=1):
            iters, seconds = out[3]
            log.debug(
                "perm %d: statistic=%.6g iterations=%d time=%.4fs",
                b, out[0], iters, seconds,
            )
    iter_total = sum(o[3][0] for o in outputs)
    log.info(
        "ran B=%d permutations (%s/%s, scheme=%s): solver iterations "
        "total=%d, statistic range [%.4g, %.4g]",
        plan.B, classifier, statistic, plan.scheme, iter_total,
        perm_statistics.min(), perm_statistics.max(),
    )

    # retain diagnostics records: first, second, extremes (or everything);
    # extreme permutations are recomputed from their streams, so no
    # per-permutation scores need to be held for the whole run
    _init_state(*state[:-1], True)
    wanted = {1, min(2, plan.B),
              int(np.argmin(perm_statistics)) + 1,
              int(np.argmax(perm_statistics)) + 1}
    records: dict[int, PermutationRecord] = {}
    for b in (indices if retain_all else sorted(wanted)):
        stat_b, perm_y, scores = outputs[b - 1][:3]
        if perm_y is None:
            stat_b, perm_y, scores = _one_permutation(b)[:3]
        records[b] = PermutationRecord(
            perm_index=b,
            permuted_labels=perm_y,
            scores=ProjectionScores(scores, perm_y),
            statistic=stat_b,
        )

    try:
        z = z_score(perm_statistics, observed_statistic)
    except (ZeroVarianceError, EmptyError):
        z = math.nan  # degenerate null (constant permutation statistics)

    return DppResult(
        config=TestConfig(classifier, statistic, plan.scheme, plan.B,
                          plan.seed, alpha),
        observed_direction=observed_direction,
        observed_scores=observed_scores,
        observed_statistic=observed_statistic,
        loadings=loadings,
        perm_statistics=perm_statistics,
        records=records,
        p_value=p_value(perm_statistics, observed_statistic),
        z_score=z,
        cutoff=cutoff(perm_statistics, alpha),
        observed_model=observed_model,
        feature_names=ds.feature_names,
    )
