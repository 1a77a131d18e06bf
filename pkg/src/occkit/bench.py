"""
Construction and query timings of the data descriptors over a doubling schedule of
training sizes.

Timings are taken sequentially in-process with native thread pools (BLAS, OpenMP)
limited to a single thread.
"""
import logging
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from threadpoolctl import threadpool_limits
from tqdm import tqdm

from .descriptors import DescriptorKind
from .exceptions import InsufficientDataError, InvalidArgumentError
from .hyperparameters import DescriptorSpec
from .models import FeatureMatrix, validate_matrix
from .neighbors import Metric

logger = logging.getLogger(__name__)

DEFAULT_REPEATS = 5
DEFAULT_QUERIES = 1024
# Native thread pools are pinned to this many threads while timing
BENCH_THREADS = 1
SUMMARY_COLUMNS = ["descriptor", "n", "construct_s", "query_us_per_instance"]


@dataclass
class BenchRecord:
    descriptor: str
    n: int
    repeat: int
    construct_s: float
    query_us_per_instance: float


def doubling_sizes(smallest: int, largest: int) -> List[int]:
    """smallest, 2 * smallest, ... up to largest."""
    if smallest < 2 or largest < smallest:
        raise InvalidArgumentError(f"Invalid size range [{smallest}, {largest}].")
    sizes = []
    size = smallest
    while size <= largest:
        sizes.append(size)
        size *= 2
    return sizes


def _sample(data: FeatureMatrix, n: int, n_queries: int, rng: np.random.Generator):
    order = rng.permutation(data.n)
    train = data.values[order[:n]]
    rest = order[n:]
    if rest.size >= n_queries:
        queries = data.values[rest[:n_queries]]
    else:
        queries = data.values[rng.choice(data.n, size=n_queries, replace=True)]
    return validate_matrix(train), queries


def run_bench(
    kinds: Sequence[DescriptorKind],
    data: FeatureMatrix,
    sizes: Sequence[int],
    seed: int = 0,
    repeats: int = DEFAULT_REPEATS,
    n_queries: int = DEFAULT_QUERIES,
    coefficients: Optional[Mapping[DescriptorKind, Mapping[str, float]]] = None,
    metric: Metric = Metric.MANHATTAN,
    show_progress: bool = False,
) -> List[BenchRecord]:
    """
    Time fit and score for every descriptor, training size and repeat.

    Each (size, repeat) draws one seeded training subsample shared by all descriptors.

    Raises:
        InsufficientDataError: If a size exceeds the available rows.
    """
    too_large = [n for n in sizes if n > data.n]
    if too_large:
        raise InsufficientDataError(f"Training size {max(too_large)} exceeds the {data.n} available rows.")
    coefficients = coefficients or {}

    records: List[BenchRecord] = []
    runs = [(n, r) for n in sizes for r in range(repeats)]
    with threadpool_limits(limits=BENCH_THREADS):
        for n, repeat in tqdm(runs, desc="bench", disable=not show_progress):
            rng = np.random.Generator(np.random.PCG64([seed, n, repeat]))
            train, queries = _sample(data, n, n_queries, rng)
            for kind in kinds:
                kind = DescriptorKind(kind)
                spec = DescriptorSpec(kind, dict(coefficients.get(kind, {})), metric, seed)
                descriptor = spec.build(train.n, train.m)

                start = time.perf_counter()
                description = descriptor.fit(train)
                construct = time.perf_counter() - start

                start = time.perf_counter()
                description.score_many(queries)
                query = time.perf_counter() - start

                records.append(BenchRecord(kind.value, n, repeat, construct, 1e6 * query / len(queries)))
            logger.info(f"Timed size {n}, repeat {repeat}")
    return records


def records_frame(records: Sequence[BenchRecord], raw: bool = False) -> pd.DataFrame:
    """Raw records, or means per (descriptor, n) in first-seen order."""
    frame = pd.DataFrame([asdict(r) for r in records], columns=list(BenchRecord.__dataclass_fields__))
    if raw:
        return frame
    return (
        frame.groupby(["descriptor", "n"], sort=False)[["construct_s", "query_us_per_instance"]]
        .mean()
        .reset_index()[SUMMARY_COLUMNS]
    )


def bench_metadata(
    kinds: Sequence[DescriptorKind], sizes: Sequence[int], seed: int, repeats: int, n_queries: int, metric: Metric
) -> Dict[str, Any]:
    return {
        "descriptors": [DescriptorKind(k).value for k in kinds],
        "sizes": list(sizes),
        "seed": seed,
        "repeats": repeats,
        "queries": n_queries,
        "metric": Metric(metric).value,
        "threads": BENCH_THREADS,
    }
