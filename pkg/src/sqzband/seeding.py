"""Deterministic RNG stream splitting for parallel batch work.

Every batch operation (bias studies, campaigns, sweep fan-out) derives one
independent stream per task as ``task_rng(root_seed, task_index)``.  The
splitting rule is a counter-based Philox generator keyed by the root seed
with the task index as spawn key, so results do not depend on scheduling
order or worker count.
"""

from __future__ import annotations

import numpy as np


def task_rng(root_seed: int, task_index: int) -> np.random.Generator:
    """Independent generator for task `task_index` under `root_seed`."""
    ss = np.random.SeedSequence(entropy=int(root_seed), spawn_key=(int(task_index),))
    return np.random.Generator(np.random.Philox(ss))


def task_seed(root_seed: int, task_index: int) -> int:
    """Scalar child seed (for APIs that take a seed rather than a Generator)."""
    ss = np.random.SeedSequence(entropy=int(root_seed), spawn_key=(int(task_index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
