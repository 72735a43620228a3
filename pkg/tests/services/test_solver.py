#!/usr/bin/env python3
"""
Unit tests for homogeneous and sourced solutions
"""

import math
import pytest
import sys
import os

import numpy as np

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..', 'src'))

from services.models import (
    ModelParams, OperatorKind, DomainError, ParityError,
    ShellCollisionError, AmplificationError
)
from services.dispersion import shell_root
from services.propagator import (
    ContourKind, OperatorSymbol, PropagatorSpec, symbol_value, propagator_value
)
from services.fields import (
    PlaneWaveMode, ModeField, GridSpec, GridField, sample, residual_norm, apply_operator
)
from services.solver import (
    SourceField, homogeneous_solution, shell_box, shell_lattice, lattice_wavevector,
    solve_sourced_spectral, solve_sourced_spectral_with_diagnostics,
    solve_sourced_odd, solve_sourced_odd_with_diagnostics, realize, locate_shell
)

TWO_PI = 2.0 * math.pi
INFINITE = OperatorKind.INFINITE_ORDER
FINITE = OperatorKind.FINITE_ORDER


def lattice_source(params, spec, entries):
    """Real source from (amplitude, m, n) lattice entries on a D = 2 box"""
    modes = tuple(
        PlaneWaveMode(
            amplitude=amplitude,
            k=(TWO_PI * n / spec.box_lengths[1],),
            omega=TWO_PI * m / spec.box_lengths[0],
        )
        for amplitude, m, n in entries
    )
    return sample(ModeField(modes=modes, params=params), spec)


def random_entries(seed, max_index, count=6):
    """(amplitude, m, n) entries with complex normal amplitudes"""
    rng = np.random.default_rng(seed)
    return [
        (complex(rng.normal(), rng.normal()), int(m), int(n))
        for m, n in rng.integers(-max_index, max_index + 1, size=(count, 2))
    ]


class TestHomogeneous:
    """On-shell superpositions for odd N"""

    def test_klein_gordon_rest_mode(self):
        """Test 1: N=1, k=0 oscillates at omega = 1/a"""
        print("🧪 Test 1: Klein-Gordon rest mode")
        mf = homogeneous_solution(ModelParams(order=1), [(1.0, (0.0,))])
        assert len(mf.modes) == 1
        assert mf.modes[0].omega == 1.0
        mf = homogeneous_solution(ModelParams(order=1, a=0.5), [(1.0, (0.0,))])
        assert mf.modes[0].omega == 2.0
        print("✅ omega = 1/a")

    def test_third_order_rest_mode(self):
        mf = homogeneous_solution(ModelParams(order=3), [(1.0, (0.0,))])
        assert mf.modes[0].omega == pytest.approx(math.sqrt(shell_root(3)), rel=1e-15)

    def test_even_order_is_trivial(self):
        with pytest.raises(ParityError) as excinfo:
            homogeneous_solution(ModelParams(order=2), [(1.0, (0.0,))])
        assert "trivial" in excinfo.value.message

    def test_two_modes_on_shell_box(self):
        """Test 2: N=3 superposition on the shell box has residual < 1e-10"""
        print("🧪 Test 2: N=3 homogeneous solution on a shell box")
        params = ModelParams(order=3)
        box = shell_box(params, 12)
        spec = GridSpec(box, (64, 64))
        spectrum = [(1.0, lattice_wavevector(box, (0,))), (0.25 - 0.5j, lattice_wavevector(box, (5,)))]
        g = sample(homogeneous_solution(params, spectrum), spec)
        report = residual_norm(params, g)
        assert not report.degenerate
        assert report.norm < 1e-10, f"residual {report.norm}"
        print(f"✅ Residual {report.norm:.2e}")

    @pytest.mark.parametrize("order", [1, 3, 5])
    @pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
    def test_five_modes_on_shell_box(self, order, a):
        """Five lattice modes of the tau = 12 shell box solve the field equation on 128 x 128"""
        params = ModelParams(order=order, a=a)
        box = shell_box(params, 12)
        spec = GridSpec(box, (128, 128))
        amplitudes = [1.0, 0.25 - 0.5j, -0.4, 0.3j, 0.1 + 0.1j]
        indices = [(0,), (5,), (-9,), (16,), (-35,)]
        spectrum = [(amp, lattice_wavevector(box, n)) for amp, n in zip(amplitudes, indices)]
        g = sample(homogeneous_solution(params, spectrum), spec)
        report = residual_norm(params, g)
        assert not report.degenerate
        assert report.norm < 1e-10, f"N={order}, a={a}: residual {report.norm}"

    def test_locate_shell_agrees(self):
        params = ModelParams(order=3)
        assert locate_shell(params, (0.0,)) == pytest.approx(math.sqrt(shell_root(3)), rel=1e-9)
        mf = homogeneous_solution(params, [(1.0, (2.0,))])
        assert locate_shell(params, (2.0,)) == pytest.approx(mf.modes[0].omega, rel=1e-9)


class TestShellBox:
    """Lattice boxes on which integer modes lie on the shell"""

    def test_box_length(self):
        assert shell_box(ModelParams(order=1), 12) == (24.0 * math.pi, 24.0 * math.pi)
        assert len(shell_box(ModelParams(order=1, dims=3), 2)) == 3
        with pytest.raises(ParityError):
            shell_box(ModelParams(order=2), 12)
        with pytest.raises(DomainError):
            shell_box(ModelParams(order=1), 0)

    def test_lattice_for_tau_12(self):
        """Test 3: m^2 - n^2 = 144"""
        print("🧪 Test 3: Shell lattice for tau = 12")
        points = shell_lattice(12)
        assert points == [
            (12, (0,)), (13, (-5,)), (13, (5,)), (15, (-9,)), (15, (9,)),
            (20, (-16,)), (20, (16,)), (37, (-35,)), (37, (35,)),
        ]
        print(f"✅ {len(points)} lattice points")

    def test_lattice_in_three_dimensions(self):
        points = shell_lattice(5, dims=3, max_index=4)
        assert (5, (0, 0)) in points
        for m, n in points:
            assert m * m - sum(v * v for v in n) == 25


class TestSpectralSolve:
    """Unique solutions for even N and infinite order"""

    def test_zero_source(self):
        spec = GridSpec((TWO_PI, TWO_PI), (16, 16))
        J = GridField(spec, np.zeros(spec.shape))
        phi = solve_sourced_spectral(ModelParams(order=2), FINITE, J)
        assert phi.max_abs() == 0.0

    def test_constant_source(self):
        """Test 4: N=2, J = c gives phi = a^2 c"""
        print("🧪 Test 4: Constant source")
        spec = GridSpec((1.0, 1.0), (8, 8))
        J = GridField(spec, np.full(spec.shape, 2.0))
        phi, diagnostics = solve_sourced_spectral_with_diagnostics(ModelParams(order=2, a=1.5), FINITE, J)
        assert np.allclose(phi.values, 4.5, rtol=1e-14)
        assert diagnostics.residual < 1e-14
        print("✅ phi = a^2 c")

    def test_infinite_order_lightlike_source(self):
        params = ModelParams(order=1)
        spec = GridSpec((TWO_PI, TWO_PI), (16, 16))
        J = lattice_source(params, spec, [(1.0, 1, 1)])
        phi = solve_sourced_spectral(params, INFINITE, J)
        assert np.max(np.abs(phi.values - J.values)) < 1e-13

    def test_infinite_order_amplification_guard(self):
        params = ModelParams(order=1)
        spec = GridSpec((TWO_PI, TWO_PI), (16, 16))
        # p^2 = 36: a^2 exp(36) > 1e12
        J = lattice_source(params, spec, [(1.0, 6, 0)])
        with pytest.raises(AmplificationError) as excinfo:
            solve_sourced_spectral(params, INFINITE, J)
        assert excinfo.value.details['direction'] == 'inverse'

    def test_infinite_order_spacelike_source(self):
        """Test 7: k=6, omega=0 inverts through exp(-36) with a small residual"""
        print("🧪 Test 7: Infinite-order spacelike source")
        params = ModelParams(order=1)
        spec = GridSpec((TWO_PI, TWO_PI), (64, 64))
        J = lattice_source(params, spec, [(1.0, 0, 6)])
        phi, diagnostics = solve_sourced_spectral_with_diagnostics(params, INFINITE, J)
        expected = J.values * math.exp(-36.0)
        assert np.max(np.abs(phi.values - expected)) < 1e-12 * np.max(np.abs(expected))
        assert diagnostics.residual < 1e-12
        assert diagnostics.max_amplification == pytest.approx(math.exp(-36.0), rel=1e-12)
        print(f"✅ Residual {diagnostics.residual:.2e}")

    def test_fourth_order_random_source(self):
        """Test 5: N=4 round trip residual < 1e-9"""
        print("🧪 Test 5: N=4 random band-limited source")
        params = ModelParams(order=4)
        spec = GridSpec((TWO_PI, TWO_PI), (32, 32))
        rng = np.random.default_rng(7)
        entries = [
            (complex(rng.normal(), rng.normal()), int(m), int(n))
            for m, n in rng.integers(-4, 5, size=(6, 2))
        ]
        J = lattice_source(params, spec, entries)
        phi, diagnostics = solve_sourced_spectral_with_diagnostics(params, FINITE, J)
        assert diagnostics.residual < 1e-9
        assert diagnostics.min_symbol > 0
        print(f"✅ Residual {diagnostics.residual:.2e}")

    @pytest.mark.parametrize("order", [2, 6])
    def test_even_order_random_source(self, order):
        params = ModelParams(order=order, a=0.9)
        spec = GridSpec((TWO_PI, TWO_PI), (32, 32))
        J = lattice_source(params, spec, random_entries(order, max_index=4))
        phi, diagnostics = solve_sourced_spectral_with_diagnostics(params, FINITE, J)
        assert diagnostics.residual < 1e-9, f"N={order}: residual {diagnostics.residual}"
        image = apply_operator(OperatorSymbol(params), phi)
        assert np.max(np.abs(image.values - J.values)) < 1e-9 * J.max_abs()

    def test_infinite_order_random_source(self):
        """Test 8: a random band-limited source round-trips through the infinite-order operator"""
        print("🧪 Test 8: Infinite-order random source")
        params = ModelParams(order=1, a=0.8)
        spec = GridSpec((TWO_PI, TWO_PI), (32, 32))
        J = lattice_source(params, spec, random_entries(17, max_index=2))
        phi, diagnostics = solve_sourced_spectral_with_diagnostics(params, INFINITE, J)
        assert diagnostics.residual < 1e-9
        image = apply_operator(OperatorSymbol(params, INFINITE), phi)
        error = float(np.max(np.abs(image.values - J.values))) / J.max_abs()
        assert error < 1e-9
        print(f"✅ Residual {diagnostics.residual:.2e}, forward check {error:.2e}")

    def test_single_mode_matches_symbol(self):
        params = ModelParams(order=4)
        spec = GridSpec((TWO_PI, TWO_PI), (16, 16))
        J = lattice_source(params, spec, [(0.5, 2, 1)])
        phi = solve_sourced_spectral(params, FINITE, J)
        expected = J.values / symbol_value(OperatorSymbol(params), 3.0)
        assert np.max(np.abs(phi.values - expected)) < 1e-12 * np.max(np.abs(expected))

    def test_odd_order_shell_collision(self):
        params = ModelParams(order=1)
        spec = GridSpec(shell_box(params, 12), (64, 64))
        J = GridField(spec, np.ones(spec.shape))
        with pytest.raises(ShellCollisionError) as excinfo:
            solve_sourced_spectral(params, FINITE, J)
        assert "contour" in excinfo.value.message

    def test_source_field_wrapper(self):
        params = ModelParams(order=2)
        spec = GridSpec((TWO_PI, TWO_PI), (16, 16))
        mf = ModeField(modes=(PlaneWaveMode(1.0, (1.0,), 2.0),), params=params)
        with pytest.raises(DomainError):
            SourceField(mf).to_grid()
        J = SourceField(mf, "one mode").to_grid(spec)
        phi = solve_sourced_spectral(params, FINITE, SourceField(J))
        assert phi.shape == spec.shape


class TestContourSolve:
    """Particular solutions for odd N"""

    def test_off_shell_mode(self):
        """Test 6: N=1, p^2 = 3 gives phi = J / (1 - 3)"""
        print("🧪 Test 6: Off-shell contour-free solve")
        params = ModelParams(order=1)
        # time unit sqrt(3), space unit 1: 3m^2 - n^2 never equals 1
        spec = GridSpec((TWO_PI / math.sqrt(3.0), TWO_PI), (16, 16))
        J = lattice_source(params, spec, [(1.0, 1, 0)])
        phi = solve_sourced_odd(params, J, contour=ContourKind.NONE)
        assert not phi.is_complex
        assert np.max(np.abs(phi.values + 0.5 * J.values)) < 1e-13
        print("✅ phi = -J/2")

    def test_shell_collision_without_contour(self):
        params = ModelParams(order=1)
        spec = GridSpec(shell_box(params, 12), (64, 64))
        J = lattice_source(params, spec, [(1.0, 12, 0)])
        with pytest.raises(ShellCollisionError):
            solve_sourced_odd(params, J, contour=ContourKind.NONE)

    def test_feynman_on_shell_amplitude(self):
        params = ModelParams(order=1)
        spec = GridSpec(shell_box(params, 12), (64, 64))
        J = lattice_source(params, spec, [(1.0, 12, 0)])
        eps = 1e-4
        phi, diagnostics = solve_sourced_odd_with_diagnostics(params, J, ContourKind.FEYNMAN_EPS, eps)
        assert phi.is_complex
        ratio = phi.max_abs() / J.max_abs()
        assert ratio == pytest.approx(1.0 / eps, rel=1e-3)
        assert diagnostics.max_amplification == pytest.approx(1.0 / eps, rel=1e-3)

    def test_feynman_matches_propagator(self):
        params = ModelParams(order=3)
        spec = GridSpec((TWO_PI, TWO_PI), (16, 16))
        J = lattice_source(params, spec, [(1.0, 1, 0)])
        phi = solve_sourced_odd(params, J, ContourKind.FEYNMAN_EPS, 1e-6)
        D = propagator_value(PropagatorSpec(params, ContourKind.FEYNMAN_EPS, 1e-6), 1.0)
        expected = 1j * D * J.values
        assert np.max(np.abs(phi.values - expected)) < 1e-12 * np.max(np.abs(expected))

    def test_particular_plus_homogeneous(self):
        """Test 9: adding an on-shell solution to a particular solution keeps L phi = J"""
        print("🧪 Test 9: Particular plus homogeneous superposition")
        params = ModelParams(order=3)
        box = shell_box(params, 12)
        spec = GridSpec(box, (64, 64))
        J = lattice_source(params, spec, [(1.0, 1, 0), (0.5 - 0.2j, 2, 3)])
        particular = solve_sourced_odd(params, J, ContourKind.FEYNMAN_EPS, 1e-9)
        h = sample(homogeneous_solution(params, [
            (1.0, lattice_wavevector(box, (0,))), (0.3j, lattice_wavevector(box, (5,)))
        ]), spec)
        assert h.max_abs() > 1.0
        total = particular.with_values(particular.values + h.values)
        s = OperatorSymbol(params)
        image = apply_operator(s, total)
        error = float(np.max(np.abs(image.values - J.values))) / J.max_abs()
        assert error < 1e-7
        real_image = apply_operator(s, realize(total))
        assert np.max(np.abs(real_image.values - J.values)) < 1e-7 * J.max_abs()
        print(f"✅ Max deviation {error:.2e}")

    def test_realize(self):
        spec = GridSpec((1.0, 1.0), (4, 4))
        g = GridField(spec, np.full(spec.shape, 1.0 + 2.0j))
        real = realize(g)
        assert not real.is_complex
        assert np.all(real.values == 1.0)
        assert realize(real) is real

    def test_even_order_rejected(self):
        J = GridField(GridSpec((1.0, 1.0), (4, 4)), np.ones((4, 4)))
        with pytest.raises(ParityError):
            solve_sourced_odd(ModelParams(order=2), J)
