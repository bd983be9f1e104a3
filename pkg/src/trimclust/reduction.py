"""The main driver: enumerate coreset outlier subsets, solve each outlier-free
instance with the black-box solver, and keep the candidate that scores best on
the original instance.

Candidate selection always re-evaluates centers on the full original instance
(cheap), never on coreset costs, so sampling noise can degrade quality but
never soundness: the returned solution is feasible and its cost is the true
trimmed cost of its centers.

The exact black box admits heavy amortization across subsets (the per-point,
per-candidate distance minima do not depend on the evicted subset), so the
driver uses a batched engine for it; the generic per-subset path remains for
local search and for differential testing, and both produce identical
candidate streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice
from typing import Callable, Iterator, Sequence

import numpy as np

from .coreset import (
    BaselineResult,
    CoresetParams,
    WeightedCoreset,
    baseline_solve,
    build_augmented_instance,
    build_coreset,
    ring_partition,
)
from .metric import (
    DistanceOracle,
    MetricInstance,
    PointId,
    Solution,
    farthest_points,
    trimmed_cost,
)
from .rng import TAG_ROUND, generator_for
from .solvers import (
    SolverBudgetExceeded,
    SolverHandle,
    _CHUNK_ELEMENTS,
    solve_outlier_free,
)

DEFAULT_FAILURE_TARGET = 0.05


def default_rounds(failure_target: float = DEFAULT_FAILURE_TARGET) -> int:
    """Repetitions needed to push a constant per-round failure odds below target."""
    return max(1, math.ceil(math.log2(1.0 / failure_target)))


def enumerate_outlier_subsets(cs: WeightedCoreset, m: int) -> Iterator[tuple[int, ...]]:
    """All entry-index subsets of size 0..m, sizes ascending, lexicographic within size.

    Indices refer to ``cs.union`` entries; evicting an entry removes its whole
    weight.  The order is stable across runs.
    """
    n = len(cs.union)
    if m > n:
        raise ValueError(f"m={m} exceeds the {n} coreset entries")
    for size in range(m + 1):
        yield from combinations(range(n), size)


def evaluate_candidate(
    C: Sequence[PointId], inst: MetricInstance
) -> tuple[float, tuple[PointId, ...]]:
    """Trimmed cost of C on the original instance and the evicted clients."""
    cost = trimmed_cost(inst.dist, inst.clients, C, inst.m, inst.z)
    outliers = farthest_points(inst.dist, inst.clients, C, inst.m, inst.z)
    return cost, outliers


@dataclass(frozen=True)
class CandidateSpace:
    """The center sets the black box may return.

    Either every ``k``-subset of ``col_ids`` (generated lazily, in
    lexicographic order) or an explicit tuple of index tuples into
    ``col_ids`` (used for matroid bases).
    """

    col_ids: tuple[PointId, ...]
    k: int | None
    explicit: tuple[tuple[int, ...], ...] | None

    @classmethod
    def subsets(cls, facilities: Sequence[PointId], k: int) -> "CandidateSpace":
        ids = tuple(sorted(int(f) for f in facilities))
        return cls(col_ids=ids, k=min(k, len(ids)), explicit=None)

    @classmethod
    def from_center_sets(
        cls, center_sets: Sequence[Sequence[PointId]]
    ) -> "CandidateSpace":
        ids = tuple(sorted({int(c) for cset in center_sets for c in cset}))
        index = {c: i for i, c in enumerate(ids)}
        explicit = tuple(tuple(index[int(c)] for c in sorted(cset)) for cset in center_sets)
        return cls(col_ids=ids, k=None, explicit=explicit)

    @property
    def count(self) -> int:
        if self.explicit is not None:
            return len(self.explicit)
        assert self.k is not None
        return math.comb(len(self.col_ids), self.k)

    def chunks(self, n_rows: int) -> Iterator[np.ndarray]:
        """Index arrays (chunk, set_size) over all candidate sets, in order."""
        if self.explicit is not None:
            if not self.explicit:
                return
            width = max(1, len(self.explicit[0]))
            per = max(1, _CHUNK_ELEMENTS // max(1, n_rows * width))
            for lo in range(0, len(self.explicit), per):
                yield np.asarray(self.explicit[lo : lo + per], dtype=np.intp)
            return
        assert self.k is not None
        per = max(1, _CHUNK_ELEMENTS // max(1, n_rows * max(1, self.k)))
        it = combinations(range(len(self.col_ids)), self.k)
        while True:
            block = list(islice(it, per))
            if not block:
                return
            yield np.asarray(block, dtype=np.intp)

    def centers_at(self, idx: int) -> tuple[PointId, ...]:
        if self.explicit is not None:
            return tuple(self.col_ids[i] for i in self.explicit[idx])
        assert self.k is not None
        combo = _combo_unrank(len(self.col_ids), self.k, idx)
        return tuple(self.col_ids[i] for i in combo)


def _combo_unrank(n: int, k: int, rank: int) -> tuple[int, ...]:
    """The rank-th k-combination of range(n) in lexicographic order."""
    combo = []
    prev = -1
    for slot in range(k, 0, -1):
        c = prev + 1
        while True:
            block = math.comb(n - c - 1, slot - 1)
            if rank < block:
                break
            rank -= block
            c += 1
        combo.append(c)
        prev = c
    return tuple(combo)


def per_subset_best_exact(
    dist: DistanceOracle,
    points: Sequence[PointId],
    weights: Sequence[float],
    space: CandidateSpace,
    z: float,
    subsets: Sequence[tuple[int, ...]],
    budget: int,
) -> list[tuple[PointId, ...]]:
    """Exact black-box answers for every evicted subset, amortized.

    For each subset T the minimizing candidate set of ``wcost(S \\ T, C)`` is
    found, with ties toward the earliest candidate in enumeration order (the
    lexicographically smallest center tuple).  Raises SolverBudgetExceeded if
    the candidate space itself is too large.
    """
    if space.count > budget:
        raise SolverBudgetExceeded(
            f"{space.count} candidate center sets exceed budget {budget}"
        )
    if space.count == 0:
        raise ValueError("empty candidate space")
    d = dist.pairwise(points, space.col_ids)
    if z != 1.0:
        d = d**z
    w = np.asarray(weights, dtype=float)
    n_T = len(subsets)
    best_cost = np.full(n_T, np.inf)
    best_idx = np.full(n_T, -1, dtype=np.int64)
    offset = 0
    for chunk in space.chunks(len(points)):
        min_d = d[:, chunk].min(axis=2)  # (n_points, chunk_size)
        full = w @ min_d
        for ti, T in enumerate(subsets):
            if T:
                rows = list(T)
                costs = full - w[rows] @ min_d[rows, :]
            else:
                costs = full
            j = int(np.argmin(costs))
            if costs[j] < best_cost[ti]:
                best_cost[ti] = costs[j]
                best_idx[ti] = offset + j
        offset += chunk.shape[0]
    return [space.centers_at(int(i)) for i in best_idx]


@dataclass(frozen=True)
class RoundRecord:
    round: int
    stream: tuple[int, ...]
    coreset_size: int
    coreset_lossless: bool
    best_cost: float | None
    evaluated: int
    skipped: int


@dataclass(frozen=True)
class ReductionReport:
    """Outcome of the full enumeration-and-select driver."""

    best: Solution
    candidates_evaluated: int
    skipped: int
    rounds: int
    per_round: tuple[RoundRecord, ...]
    seed: int
    baseline: BaselineResult
    epsilon_factor: float  # the (1+eps)/(1-eps) quality factor the run aims for


def _run_rounds(
    inst: MetricInstance,
    params: CoresetParams,
    solver: SolverHandle,
    rounds: int,
    seed: int,
    build_cs: Callable[[np.random.Generator], object],
    enum_subsets: Callable[[object], Iterator[tuple[int, ...]]],
    space: CandidateSpace,
    generic_black_box: Callable[[np.ndarray, np.ndarray], tuple[PointId, ...]] | None,
    objective: Callable[[tuple[PointId, ...]], tuple[float, tuple[PointId, ...]]],
    prune: bool,
    prune_ground: Sequence[PointId] | None,
) -> tuple[Solution, tuple[RoundRecord, ...], int, int]:
    """Shared round loop; returns (best, per_round, evaluated, skipped).

    ``build_cs`` may return any coreset flavor exposing ``union`` (a
    WeightedPointSet) and ``lossless``; ``enum_subsets`` receives it whole so
    variant-specific enumeration (per-color budgets) can see the provenance.
    """
    best: Solution | None = None
    records: list[RoundRecord] = []
    total_eval = 0
    total_skip = 0
    for r in range(rounds):
        rng = generator_for(seed, TAG_ROUND, r)
        cs = build_cs(rng)
        union = cs.union
        pts, w = union.as_arrays()
        subsets = list(enum_subsets(cs))
        round_best: float | None = None
        evaluated = 0
        skipped = 0
        seen: set[tuple[PointId, ...]] = set()

        if solver.kind == "exact" and generic_black_box is None:
            try:
                answers = per_subset_best_exact(
                    inst.dist, pts, w, space, inst.z, subsets, solver.enumeration_budget
                )
            except SolverBudgetExceeded:
                answers = [None] * len(subsets)  # type: ignore[list-item]
        else:
            answers = _per_subset_generic(
                inst, pts, w, subsets, generic_black_box, solver,
                prune=prune, prune_ground=prune_ground,
                incumbent=lambda: best.cost if best is not None else math.inf,
            )

        for T, centers in zip(subsets, answers):
            if centers is None:
                skipped += 1
                continue
            key = tuple(sorted(centers))
            if key in seen:
                continue
            seen.add(key)
            cost, outliers = objective(key)
            evaluated += 1
            if round_best is None or cost < round_best:
                round_best = cost
            if best is None or cost < best.cost:
                tag = f"r{r}:T{','.join(map(str, T))}"
                best = Solution(centers=key, outliers=outliers, cost=cost, candidate_tag=tag)
        total_eval += evaluated
        total_skip += skipped
        records.append(
            RoundRecord(
                round=r,
                stream=(TAG_ROUND, r),
                coreset_size=len(union),
                coreset_lossless=cs.lossless,
                best_cost=round_best,
                evaluated=evaluated,
                skipped=skipped,
            )
        )
    if best is None:
        raise RuntimeError("every candidate was refused by the black-box solver")
    return best, tuple(records), total_eval, total_skip


def _per_subset_generic(
    inst: MetricInstance,
    pts: np.ndarray,
    w: np.ndarray,
    subsets: Sequence[tuple[int, ...]],
    black_box: Callable[[np.ndarray, np.ndarray], tuple[PointId, ...]] | None,
    solver: SolverHandle,
    prune: bool,
    prune_ground: Sequence[PointId] | None,
    incumbent: Callable[[], float],
) -> Iterator[tuple[PointId, ...] | None]:
    """Per-subset black-box calls, optionally skipping provably useless subsets.

    The pruning bound: each kept entry costs at least its weighted distance to
    the nearest point of the candidate ground, so if that total already beats
    the incumbent the subset cannot produce a better candidate.
    """
    if black_box is None:
        bb = lambda p, ww: solve_outlier_free(
            inst.dist, p, ww, inst.facilities, inst.k, inst.z, solver
        )
    else:
        bb = black_box
    lower = None
    if prune:
        ground = tuple(prune_ground if prune_ground is not None else inst.facilities)
        dmin = inst.dist.pairwise(pts, ground).min(axis=1)
        if inst.z != 1.0:
            dmin = dmin**inst.z
        lower = dmin * w
    total_lower = float(lower.sum()) if lower is not None else 0.0

    for T in subsets:
        if lower is not None:
            lb = total_lower - (float(lower[list(T)].sum()) if T else 0.0)
            if lb > incumbent():
                yield None
                continue
        mask = np.ones(len(pts), dtype=bool)
        if T:
            mask[list(T)] = False
        try:
            yield bb(pts[mask], w[mask])
        except SolverBudgetExceeded:
            yield None


def solve_with_outliers(
    inst: MetricInstance,
    params: CoresetParams,
    solver: SolverHandle,
    *,
    seed: int,
    rounds: int | None = None,
    prune: bool = False,
    baseline_exact_budget: int | None = None,
) -> ReductionReport:
    """Full pipeline: baseline, rings, coreset, subset enumeration, selection.

    Per round a fresh coreset is drawn (stream (TAG_ROUND, r) under ``seed``);
    the baseline and ring partition are deterministic and shared.  The best
    candidate across all rounds is returned, with its cost re-evaluated on the
    original instance.
    """
    if params.z != inst.z:
        raise ValueError(f"params.z={params.z} disagrees with instance z={inst.z}")
    rounds = default_rounds() if rounds is None else rounds
    if rounds < 1:
        raise ValueError("rounds must be >= 1")

    aug = build_augmented_instance(inst)
    kwargs = {} if baseline_exact_budget is None else {"exact_budget": baseline_exact_budget}
    base = baseline_solve(aug, **kwargs)
    rp = ring_partition(inst, base.centers, params.tau)

    best, records, evaluated, skipped = _run_rounds(
        inst,
        params,
        solver,
        rounds,
        seed,
        build_cs=lambda rng: build_coreset(rp, params, rng),
        enum_subsets=lambda cs: enumerate_outlier_subsets(cs, min(inst.m, len(cs.union))),
        space=CandidateSpace.subsets(inst.facilities, inst.k),
        generic_black_box=None if solver.kind == "exact" else _plain_black_box(inst, solver),
        objective=lambda C: evaluate_candidate(C, inst),
        prune=prune,
        prune_ground=None,
    )
    eps = params.epsilon
    return ReductionReport(
        best=best,
        candidates_evaluated=evaluated,
        skipped=skipped,
        rounds=rounds,
        per_round=records,
        seed=seed,
        baseline=base,
        epsilon_factor=(1 + eps) / (1 - eps),
    )


def _plain_black_box(inst: MetricInstance, solver: SolverHandle):
    return lambda p, w: solve_outlier_free(
        inst.dist, p, w, inst.facilities, inst.k, inst.z, solver
    )
