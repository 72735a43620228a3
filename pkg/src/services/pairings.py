#!/usr/bin/env python3
"""
Perfect pairings and the symmetrized metric product eta^<mu_1 ... mu_2n>

eta^<mu_(2n)> is the average over all (2n-1)!! pairings of the indices of
the product of one metric per pair; contracted with 2n vectors it becomes
the pairing average of Minkowski dot products.
"""

from collections import Counter
from functools import lru_cache
from typing import Dict, Hashable, Iterator, List, Sequence, Tuple

import numpy as np

from .models import CountError

MAX_VECTORS = 8

Pairing = List[Tuple[int, int]]


def all_pairings(items: Sequence) -> Iterator[Pairing]:
    """
    Yields all pairings (partitions into 2-element parts) of the items
    """
    items = list(items)
    if len(items) == 0:
        yield []
        return

    first_item = items.pop(0)
    for i, item in enumerate(items):
        first_pair = (first_item, item)
        for pairing in all_pairings(items[:i] + items[i + 1:]):
            yield [first_pair] + pairing


@lru_cache(maxsize=None)
def pairings_of(n_items: int) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
    """Cached pairings of range(n_items) for even n_items <= 8"""
    _check_count(n_items)
    return tuple(tuple(p) for p in all_pairings(range(n_items)))


def double_factorial(n: int) -> int:
    """n!! with (-1)!! = 0!! = 1"""
    result = 1
    while n > 1:
        result *= n
        n -= 2
    return result


def _check_count(count: int) -> None:
    if count % 2 == 1 or count > MAX_VECTORS:
        raise CountError(
            f"Symmetrized metric needs an even number of at most {MAX_VECTORS} indices, got {count}",
            {'count': count, 'max': MAX_VECTORS}
        )


def minkowski_dot(u: np.ndarray, v: np.ndarray) -> float:
    """u^0 v^0 - sum_i u^i v^i"""
    return float(u[0] * v[0] - np.dot(u[1:], v[1:]))


def sym_metric_contract(vectors: Sequence[Sequence[float]]) -> float:
    """
    (1/(2n-1)!!) sum over pairings of the product of pairwise Minkowski dots

    Examples:
        (u, v) -> u.v
        (e0, e0, e0, e0) -> 1

    Raises:
        CountError: odd count or more than 8 vectors
    """
    count = len(vectors)
    _check_count(count)
    if count == 0:
        return 1.0
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    dims = {v.shape for v in vectors}
    if len(dims) != 1:
        raise CountError(f"All vectors must have the same dimension, got {sorted(dims)}")
    total = 0.0
    for pairing in pairings_of(count):
        term = 1.0
        for i, j in pairing:
            term *= minkowski_dot(vectors[i], vectors[j])
        total += term
    return total / double_factorial(count - 1)


@lru_cache(maxsize=None)
def pairing_signatures(labels: Tuple[Hashable, ...]) -> Tuple[Tuple[Tuple[Tuple[Hashable, Hashable], ...], int], ...]:
    """
    Pairings of a labelled index list grouped by the multiset of label pairs

    Vectors sharing a label are equal, so every pairing with the same
    signature contributes the same product; contracting then costs one
    product per signature instead of one per pairing.
    """
    _check_count(len(labels))
    counts: Counter = Counter()
    for pairing in pairings_of(len(labels)):
        signature = tuple(sorted(tuple(sorted((labels[i], labels[j]))) for i, j in pairing))
        counts[signature] += 1
    return tuple(sorted(counts.items()))


def labelled_contract(labels: Tuple[Hashable, ...], gram: Dict[Tuple[Hashable, Hashable], complex]) -> complex:
    """
    sym_metric_contract for repeated vectors given their Gram entries

    gram[(x, y)] is the Minkowski dot of the vectors labelled x <= y.
    """
    if not labels:
        return 1.0
    total = 0.0
    for signature, multiplicity in pairing_signatures(labels):
        term = multiplicity
        for pair in signature:
            term = term * gram[pair]
        total += term
    return total / double_factorial(len(labels) - 1)
