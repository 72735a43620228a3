#!/usr/bin/env python3
"""
Unit tests for perfect pairings and symmetrized metric contractions
"""

import pytest
import sys
import os

import numpy as np

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..', 'src'))

from services.models import CountError
from services.pairings import (
    all_pairings, pairings_of, double_factorial, minkowski_dot,
    sym_metric_contract, pairing_signatures, labelled_contract
)


class TestPairings:
    """Enumeration of perfect pairings"""

    @pytest.mark.parametrize("count,expected", [(0, 1), (2, 1), (4, 3), (6, 15), (8, 105)])
    def test_pairing_counts(self, count, expected):
        assert len(pairings_of(count)) == expected
        assert double_factorial(count - 1) == expected

    def test_pairings_cover_every_item_once(self):
        for pairing in all_pairings(['a', 'b', 'c', 'd']):
            used = [item for pair in pairing for item in pair]
            assert sorted(used) == ['a', 'b', 'c', 'd']

    def test_count_guard(self):
        with pytest.raises(CountError):
            pairings_of(3)
        with pytest.raises(CountError):
            pairings_of(10)


class TestSymmetrizedContraction:
    """eta^<mu(2n)> contracted with vectors"""

    def test_two_vectors(self):
        """Test 1: a single pairing gives the Minkowski dot"""
        print("🧪 Test 1: Two-vector contraction")
        u = np.array([2.0, 1.0, 0.5])
        v = np.array([1.0, -3.0, 4.0])
        assert sym_metric_contract([u, v]) == pytest.approx(2.0 + 3.0 - 2.0)
        assert minkowski_dot(u, v) == pytest.approx(3.0)
        print("✅ eta^<ab> u_a v_b = u.v")

    def test_four_vectors(self):
        rng = np.random.default_rng(1)
        u, v, w, z = rng.normal(size=(4, 2))
        dot = minkowski_dot
        expected = (dot(u, v) * dot(w, z) + dot(u, w) * dot(v, z) + dot(u, z) * dot(v, w)) / 3.0
        assert sym_metric_contract([u, v, w, z]) == pytest.approx(expected, rel=1e-14)

    def test_unit_time_vector(self):
        e0 = [1.0, 0.0]
        assert sym_metric_contract([e0] * 4) == pytest.approx(1.0)
        assert sym_metric_contract([e0] * 8) == pytest.approx(1.0)

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(2)
        vectors = list(rng.normal(size=(6, 3)))
        reference = sym_metric_contract(vectors)
        shuffled = [vectors[i] for i in (3, 0, 5, 1, 4, 2)]
        assert sym_metric_contract(shuffled) == pytest.approx(reference, rel=1e-13)

    def test_empty_and_invalid(self):
        assert sym_metric_contract([]) == 1.0
        with pytest.raises(CountError):
            sym_metric_contract([[1.0, 0.0]] * 3)
        with pytest.raises(CountError):
            sym_metric_contract([[1.0, 0.0]] * 10)
        with pytest.raises(CountError):
            sym_metric_contract([[1.0, 0.0], [1.0, 0.0, 0.0]])


class TestLabelledContraction:
    """Grouped pairings for repeated vectors"""

    def test_signature_multiplicities_sum_to_pairing_count(self):
        labels = ('w', 'a', 'a', 'b', 'b', 'b')
        total = sum(multiplicity for _, multiplicity in pairing_signatures(labels))
        assert total == 15

    def test_matches_plain_contraction(self):
        """Test 2: labelled and plain contractions agree"""
        print("🧪 Test 2: Labelled contraction")
        rng = np.random.default_rng(3)
        vectors = {name: rng.normal(size=3) for name in ('w', 'a', 'b')}
        gram = {}
        for x in vectors:
            for y in vectors:
                key = tuple(sorted((x, y)))
                gram[key] = minkowski_dot(vectors[key[0]], vectors[key[1]])
        for labels in [('w', 'a'), ('w', 'a', 'a', 'b'), ('w', 'b', 'b', 'b'), ('w', 'a', 'a', 'a', 'b', 'b', 'b', 'b')]:
            plain = sym_metric_contract([vectors[label] for label in labels])
            assert labelled_contract(labels, gram) == pytest.approx(plain, rel=1e-12), f"labels {labels}"
        print("✅ Agreement up to eight indices")

    def test_empty_labels(self):
        assert labelled_contract((), {}) == 1.0
