#!/usr/bin/env python3
"""
Unit tests for the energy-momentum tensor
Closed forms, the general recursion, divergence and the Noether identity
"""

import math
import pytest
import sys
import os

import numpy as np

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..', 'src'))

from services.models import ModelParams, DomainError, RangeError, CommensurabilityError
from services.fields import PlaneWaveMode, ModeField, GridSpec, GridField, sample, minkowski_metric
from services.solver import shell_box, homogeneous_solution, lattice_wavevector
from services.energy_momentum import (
    NOETHER_SIGN, EMTField, emt_terms, level_coefficient, recursion_term_count,
    emt_closed, emt_general, emt_general_at, divergence,
    noether_identity_residual, noether_identity_residual_modes, emt_summary
)

TWO_PI = 2.0 * math.pi


def lattice_field(params, spec, entries):
    """Real mode field from (amplitude, m, n) entries on a D = 2 box"""
    modes = tuple(
        PlaneWaveMode(
            amplitude=amplitude,
            k=(TWO_PI * n / spec.box_lengths[1],),
            omega=TWO_PI * m / spec.box_lengths[0],
        )
        for amplitude, m, n in entries
    )
    return ModeField(modes=modes, params=params)


def constant_field(params, c):
    return ModeField(modes=(PlaneWaveMode(amplitude=c / 2.0, k=(0.0,), omega=0.0),), params=params)


@pytest.fixture
def off_shell_entries():
    """A few low lattice modes, off the mass shell"""
    return [(0.6, 1, 2), (0.3 - 0.4j, 2, -1), (0.25j, 3, 1), (0.5, 0, 1)]


class TestRecursionTerms:
    """Term bookkeeping"""

    def test_term_count(self):
        for N in range(0, 5):
            terms = emt_terms(ModelParams(order=N))
            assert len(terms) == recursion_term_count(N) == (N + 1) ** 2

    def test_first_order_coefficients(self):
        """Test 1: N=1 terms reproduce T^(2)"""
        print("🧪 Test 1: First-order recursion terms")
        terms = emt_terms(ModelParams(order=1))
        assert [(t.kind, t.n, t.m) for t in terms] == [('mass', 0, 0), ('box', 1, 0), ('sym', 1, 0), ('sym', 1, 1)]
        assert [t.coefficient for t in terms] == [0.5, 0.5, -0.5, 0.5]
        print("✅ 1/2, 1/2, -1/2, +1/2")

    def test_level_coefficient(self):
        assert level_coefficient(1.0, 1) == 0.5
        assert level_coefficient(2.0, 2) == pytest.approx(4.0 / 4.0)
        assert level_coefficient(1.0, 3) == pytest.approx(1.0 / 12.0)


class TestClosedForms:
    """T^(2) and T^(4) on grids"""

    @pytest.mark.parametrize("order", [1, 2])
    def test_constant_field(self, order):
        spec = GridSpec((2.0, 3.0), (8, 8))
        g = GridField(spec, np.full(spec.shape, 2.0))
        T = emt_closed(ModelParams(order=order, a=2.0), g)
        expected = minkowski_metric(2) * 4.0 / 8.0
        for alpha in range(2):
            for mu in range(2):
                assert np.allclose(T.component(alpha, mu), expected[alpha, mu], rtol=1e-13, atol=1e-13)

    def test_zero_field(self):
        spec = GridSpec((2.0, 3.0), (8, 8))
        T = emt_closed(ModelParams(order=2), GridField(spec, np.zeros(spec.shape)))
        assert T.max_abs() == 0.0

    def test_guards(self):
        spec = GridSpec((2.0, 3.0), (8, 8))
        with pytest.raises(RangeError):
            emt_closed(ModelParams(order=3), GridField(spec, np.ones(spec.shape)))
        with pytest.raises(DomainError):
            emt_closed(ModelParams(order=1), GridField(spec, np.ones(spec.shape) * 1j))

    def test_unresolved_grid_rejected(self):
        """Test 5: modes (3, 5) and (6, -2) on 16 points alias in the quadratic tensor"""
        print("🧪 Test 5: Grid bandwidth check")
        params = ModelParams(order=1)
        spec = GridSpec((TWO_PI, TWO_PI), (16, 16))
        g = sample(lattice_field(params, spec, [(1.0, 3, 5), (1.0, 6, -2)]), spec)
        with pytest.raises(CommensurabilityError) as excinfo:
            emt_closed(params, g)
        assert excinfo.value.details['points'] == 16
        with pytest.raises(CommensurabilityError):
            noether_identity_residual(params, g)
        print("✅ CommensurabilityError instead of an aliased tensor")

    def test_resolution_boundary(self):
        params = ModelParams(order=1)
        spec = GridSpec((TWO_PI, TWO_PI), (16, 16))
        emt_closed(params, sample(lattice_field(params, spec, [(1.0, 3, -3)]), spec))
        with pytest.raises(CommensurabilityError) as excinfo:
            emt_closed(params, sample(lattice_field(params, spec, [(1.0, 1, 4)]), spec))
        assert excinfo.value.details['axis'] == 1

    def test_tensor_shape_checked(self):
        spec = GridSpec((2.0, 3.0), (8, 8))
        with pytest.raises(DomainError):
            EMTField(spec=spec, components=np.zeros((2, 2, 4, 4)), order=1)


class TestGeneralRecursion:
    """T^(2N) for N <= 4 on mode fields"""

    @pytest.mark.parametrize("order", [1, 2])
    def test_matches_closed_form(self, order, off_shell_entries):
        """Test 2: recursion and closed form agree on a random field"""
        print(f"🧪 Test 2: Recursion vs closed form, N={order}")
        params = ModelParams(order=order, a=0.8)
        spec = GridSpec((TWO_PI, TWO_PI), (32, 32))
        mf = lattice_field(params, spec, off_shell_entries)
        general = emt_general(params, mf, spec)
        closed = emt_closed(params, sample(mf, spec))
        scale = closed.max_abs()
        difference = float(np.max(np.abs(general.components - closed.components)))
        assert difference < 1e-10 * scale, f"difference {difference} vs scale {scale}"
        print(f"✅ Max difference {difference:.2e}")

    @pytest.mark.parametrize("order", [0, 1, 2, 3, 4])
    def test_constant_field(self, order):
        params = ModelParams(order=order, a=0.5)
        spec = GridSpec((1.0, 1.0), (8, 8))
        T = emt_general(params, constant_field(params, 3.0), spec)
        expected = minkowski_metric(2) * 9.0 / (2.0 * 0.25)
        for alpha in range(2):
            for mu in range(2):
                assert np.allclose(T.component(alpha, mu), expected[alpha, mu], rtol=1e-13)

    def test_rest_mode_energy_is_constant(self):
        """N=1, k=0: T^00 = (phi^2 + phi_t^2)/2 is time independent"""
        params = ModelParams(order=1)
        mf = homogeneous_solution(params, [(1.0, (0.0,))])
        t = np.linspace(0.0, 6.0, 25)
        points = np.stack([t, np.zeros_like(t)])
        T = emt_general_at(params, mf, points)
        assert np.allclose(T[0, 0], 2.0, rtol=0, atol=1e-13)

    def test_order_cap(self):
        params = ModelParams(order=5)
        spec = GridSpec((1.0, 1.0), (8, 8))
        with pytest.raises(RangeError):
            emt_general(params, constant_field(params, 1.0), spec)

    def test_unresolved_products(self):
        params = ModelParams(order=1)
        spec = GridSpec((TWO_PI, TWO_PI), (32, 32))
        with pytest.raises(CommensurabilityError):
            emt_general(params, lattice_field(params, spec, [(1.0, 8, 0)]), spec)


class TestConservation:
    """Divergence on shell and the off-shell Noether identity"""

    def test_divergence_of_constant_tensor(self):
        spec = GridSpec((1.0, 2.0), (8, 8))
        components = np.broadcast_to(np.array([[1.0, 2.0], [3.0, 4.0]])[:, :, None, None], (2, 2, 8, 8)).copy()
        div = divergence(EMTField(spec=spec, components=components, order=1))
        assert np.max(np.abs(div)) < 1e-13

    @pytest.mark.parametrize("order", [1, 3])
    def test_on_shell_conservation(self, order):
        """Test 3: d_alpha T^{alpha mu} ~ 0 on solutions"""
        print(f"🧪 Test 3: On-shell conservation, N={order}")
        params = ModelParams(order=order)
        box = shell_box(params, 12)
        spec = GridSpec(box, (64, 64))
        spectrum = [(1.0, lattice_wavevector(box, (0,))), (0.5j, lattice_wavevector(box, (5,)))]
        mf = homogeneous_solution(params, spectrum)
        T = emt_general(params, mf, spec)
        div = divergence(T)
        assert np.max(np.abs(div)) < 1e-8 * T.max_abs()
        modes_check = noether_identity_residual_modes(params, mf, spec.coordinates())
        assert modes_check['divergence'] < 1e-8 * T.max_abs()
        print(f"✅ Max divergence {np.max(np.abs(div)):.2e}")

    def test_off_shell_divergence_is_nonzero(self, off_shell_entries):
        params = ModelParams(order=1)
        spec = GridSpec((TWO_PI, TWO_PI), (32, 32))
        T = emt_general(params, lattice_field(params, spec, off_shell_entries), spec)
        assert np.max(np.abs(divergence(T))) > 1e-3 * T.max_abs()

    @pytest.mark.parametrize("order", [1, 2])
    def test_grid_noether_identity(self, order, off_shell_entries):
        """Test 4: div T = E(phi) d^mu phi off shell"""
        print(f"🧪 Test 4: Grid Noether identity, N={order}")
        params = ModelParams(order=order)
        spec = GridSpec((TWO_PI, TWO_PI), (32, 32))
        g = sample(lattice_field(params, spec, off_shell_entries), spec)
        T = emt_closed(params, g)
        raw = float(np.max(np.abs(divergence(T))))
        residual = noether_identity_residual(params, g)
        assert residual < 1e-8 * T.max_abs()
        assert raw > 1e-3 * T.max_abs(), "off-shell field should not be conserved"
        print(f"✅ Residual {residual:.2e}, raw divergence {raw:.2e}")

    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_mode_noether_identity(self, order, off_shell_entries):
        params = ModelParams(order=order, a=0.7)
        spec = GridSpec((TWO_PI, TWO_PI), (32, 32))
        mf = lattice_field(params, spec, off_shell_entries)
        points = spec.coordinates()[:, ::4, ::4]
        check = noether_identity_residual_modes(params, mf, points)
        scale = float(np.max(np.abs(emt_general_at(params, mf, points))))
        assert check['residual'] < 1e-9 * scale, f"N={order}: {check}"
        assert check['divergence'] > 1e-3 * scale

    def test_zero_field_identity(self):
        spec = GridSpec((1.0, 1.0), (8, 8))
        assert noether_identity_residual(ModelParams(order=2), GridField(spec, np.zeros(spec.shape))) == 0.0

    def test_noether_sign(self):
        assert NOETHER_SIGN == 1.0


class TestSummary:
    """Slice integrals"""

    def test_constant_field_summary(self):
        spec = GridSpec((2.0, 3.0), (8, 8))
        T = emt_closed(ModelParams(order=1), GridField(spec, np.full(spec.shape, 2.0)))
        summary = emt_summary(T)
        # T^00 = c^2/(2a^2) = 2 over a slice of length 3
        assert summary['energy_total'] == pytest.approx(6.0, rel=1e-13)
        assert summary['momentum_total'] == [pytest.approx(0.0, abs=1e-13)]
        assert summary['max_divergence'] < 1e-12


class TestQuadraticStructure:
    """Scaling and the Noether identity over many fields"""

    @pytest.mark.parametrize("order", [1, 2])
    def test_closed_form_scales_quadratically(self, order, off_shell_entries):
        params = ModelParams(order=order, a=1.1)
        spec = GridSpec((TWO_PI, TWO_PI), (32, 32))
        g = sample(lattice_field(params, spec, off_shell_entries), spec)
        T = emt_closed(params, g)
        for scale in (-2.0, 0.3, 7.5):
            scaled = emt_closed(params, g.with_values(scale * g.values))
            difference = float(np.max(np.abs(scaled.components - scale ** 2 * T.components)))
            assert difference < 1e-12 * scale ** 2 * T.max_abs()

    @pytest.mark.parametrize("order", [1, 3, 4])
    def test_recursion_scales_quadratically(self, order, off_shell_entries):
        params = ModelParams(order=order, a=0.7)
        spec = GridSpec((TWO_PI, TWO_PI), (32, 32))
        mf = lattice_field(params, spec, off_shell_entries)
        scaled_entries = [(2.5 * amplitude, m, n) for amplitude, m, n in off_shell_entries]
        T = emt_general(params, mf, spec)
        scaled = emt_general(params, lattice_field(params, spec, scaled_entries), spec)
        difference = float(np.max(np.abs(scaled.components - 6.25 * T.components)))
        assert difference < 1e-12 * 6.25 * T.max_abs()

    @pytest.mark.parametrize("order", [1, 2])
    def test_noether_identity_on_random_fields(self, order):
        """Test 6: the grid identity holds on 20 random off-shell fields"""
        print(f"🧪 Test 6: Noether identity on 20 random fields, N={order}")
        params = ModelParams(order=order, a=0.9)
        spec = GridSpec((TWO_PI, TWO_PI), (32, 32))
        worst = 0.0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            entries = [
                (complex(rng.normal(), rng.normal()), int(m), int(n))
                for m, n in rng.integers(-3, 4, size=(4, 2))
            ]
            g = sample(lattice_field(params, spec, entries), spec)
            T = emt_closed(params, g)
            if T.max_abs() == 0.0:
                continue
            ratio = noether_identity_residual(params, g) / T.max_abs()
            worst = max(worst, ratio)
            assert ratio < 1e-8, f"seed {seed}: relative residual {ratio}"
        print(f"✅ Worst relative residual {worst:.2e}")
