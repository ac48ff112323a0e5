"""Delay schedules modeling a master/worker parameter server.

A schedule lists, for each master iteration k, which workers hand in a fresh
block gradient and which stored iterate each refresh was evaluated at.  The
solver replays the schedule deterministically, which makes asynchronous runs
exactly reproducible; staleness of every table entry stays within the
declared bound ``tau``.

Conventions
-----------
* Worker ids are 0-based.
* The gradient table starts with every block evaluated at x_0 (source 0),
  so initial staleness is 0.
* Generators emit refreshes that read the master's current iterate
  (source_iter == k); hand-built schedules may use older sources to model
  transit delay, as long as staleness stays within ``tau``.

Wire format: one JSON object per line, ``{"k": k, "refreshed": [...],
"source_iter": [...]}``.

A threaded execution mode is intentionally left as a contract: worker tasks
would communicate with the master over ordered queues, the master would
serialize table updates, and observed staleness would still be recorded and
bounded.  Such a mode is not deterministic and nothing here depends on it;
all provided execution is the deterministic replay in ``solver.run``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .rng import SplitMix64


class ScheduleError(ValueError):
    """Malformed schedule or violated staleness bound."""


@dataclass
class DelaySchedule:
    """Per-iteration refresh sets with declared staleness bound."""

    num_workers: int
    tau: int
    refreshed: list
    source_iter: list

    def __post_init__(self):
        if self.num_workers < 1:
            raise ScheduleError("need at least one worker")
        if self.tau < 0:
            raise ScheduleError("tau must be nonnegative")
        if len(self.refreshed) != len(self.source_iter):
            raise ScheduleError("refreshed and source_iter must align")
        for k, (ws, ss) in enumerate(zip(self.refreshed, self.source_iter)):
            if len(ws) != len(ss):
                raise ScheduleError(f"iteration {k}: refresh lists must align")
            for w, s in zip(ws, ss):
                if not 0 <= w < self.num_workers:
                    raise ScheduleError(f"iteration {k}: worker id {w} out of range")
                if not 0 <= s <= k:
                    raise ScheduleError(f"iteration {k}: source {s} out of range")

    @property
    def iterations(self) -> int:
        return len(self.refreshed)

    def to_jsonl(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for k in range(self.iterations):
                fh.write(
                    json.dumps(
                        {
                            "k": k,
                            "refreshed": list(map(int, self.refreshed[k])),
                            "source_iter": list(map(int, self.source_iter[k])),
                        }
                    )
                    + "\n"
                )

    @classmethod
    def from_jsonl(cls, path: str, num_workers: int, tau: int) -> "DelaySchedule":
        refreshed, sources = [], []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if rec["k"] != len(refreshed):
                    raise ScheduleError("iteration records out of order")
                refreshed.append([int(w) for w in rec["refreshed"]])
                sources.append([int(s) for s in rec["source_iter"]])
        return cls(num_workers=num_workers, tau=tau, refreshed=refreshed, source_iter=sources)


def schedule_synchronous(num_workers: int, iters: int) -> DelaySchedule:
    """Every worker refreshes at every iteration; staleness is always 0."""
    if iters < 0:
        raise ScheduleError("iters must be nonnegative")
    all_workers = list(range(num_workers))
    return DelaySchedule(
        num_workers=num_workers,
        tau=0,
        refreshed=[list(all_workers) for _ in range(iters)],
        source_iter=[[k] * num_workers for k in range(iters)],
    )


def schedule_uniform_single(
    num_workers: int, tau: int, iters: int, seed: int
) -> DelaySchedule:
    """One uniformly chosen worker refreshes per iteration, delays capped.

    One PRNG draw is consumed per iteration.  Whenever a block's staleness
    would exceed ``tau`` this iteration, that block is refreshed instead of
    the drawn one (every such block; several can hit the cap at once after
    an unlucky streak of draws).  With a single worker this degenerates to
    the synchronous schedule.
    """
    if iters < 0:
        raise ScheduleError("iters must be nonnegative")
    if num_workers < 1:
        raise ScheduleError("need at least one worker")
    if tau < 0:
        raise ScheduleError("tau must be nonnegative")
    rng = SplitMix64(seed)
    picks = (rng.u64_array(iters) % np.uint64(num_workers)).astype(int) if iters else []
    sources = np.zeros(num_workers, dtype=int)
    refreshed, source_iter = [], []
    for k in range(iters):
        forced = np.nonzero(k - sources > tau)[0]
        chosen = forced.tolist() if forced.size else [int(picks[k])]
        for w in chosen:
            sources[w] = k
        refreshed.append(chosen)
        source_iter.append([k] * len(chosen))
    return DelaySchedule(
        num_workers=num_workers, tau=tau, refreshed=refreshed, source_iter=source_iter
    )


def max_observed_staleness(schedule: DelaySchedule) -> int:
    """Largest table-entry staleness over the whole replay.

    Counts both the refresh-time staleness (k minus the source iterate) and
    the aging of entries between refreshes.  Raises ScheduleError if the
    declared ``tau`` is ever exceeded; bounds are enforced, never clamped.
    """
    sources = np.zeros(schedule.num_workers, dtype=int)
    worst = 0
    for k in range(schedule.iterations):
        for w, s in zip(schedule.refreshed[k], schedule.source_iter[k]):
            sources[w] = s
        stalest = int(np.max(k - sources)) if schedule.num_workers else 0
        worst = max(worst, stalest)
    if worst > schedule.tau:
        raise ScheduleError(
            f"observed staleness {worst} exceeds declared tau {schedule.tau}"
        )
    return worst
