import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xyergodic.analytic import (
    ChainPoint,
    QuadratureSpec,
    dispersion,
    equilibrium_correlator_set,
    equilibrium_G,
    equilibrium_magnetization,
    evolved_correlator_set,
    evolved_G,
    evolved_magnetization,
    evolved_magnetization_result,
    infinite_chain_entanglement,
)
from xyergodic.observables import two_site_from_correlators

# Frozen from an independent rewrite of the closed forms integrated with
# 4000-node Gauss-Legendre (no scipy, no package code): m_z, t_xx, t_yy, t_zz.
EVOLVED_B20_G05 = {
    0.2: (0.003092449601, -0.952172204562, -0.181341185261, -0.172658472903),
    0.6: (0.077596611224, -0.799904459209, -0.234022479093, -0.181174390508),
    1.2: (0.567936950682, -0.224777058255, 0.032131214175, 0.329774739751),
    2.0: (0.642654004349, -0.105901250980, 0.037606662709, 0.416986761932),
}
EQUILIBRIUM_G05 = {
    (0.0, 2.0): (0.0, -0.618415064037, -0.179129960743, -0.110776666144),
    (0.0, 20.0): (0.0, -0.971601162414, -0.169095779329, -0.164293655755),
    (0.6, 5.0): (0.403535521304, -0.750305968271, -0.103540757067, 0.085153668967),
    (1.5, 1.0): (0.585351185230, -0.254308433133, -0.046189034461, 0.330889749068),
}
FIELDS = ("m_z", "t_xx", "t_yy", "t_zz")


def test_dispersion_values():
    assert dispersion(0.0, 0.0, 0.5) == pytest.approx(1.0)
    assert dispersion(0.0, math.pi / 2, 0.5) == pytest.approx(0.5)
    assert dispersion(2.0, math.pi, 0.3) == pytest.approx(3.0)
    assert dispersion(1.0, 0.0, 0.7) == 0.0


@pytest.mark.parametrize("a", sorted(EVOLVED_B20_G05))
def test_evolved_against_frozen_oracle(a):
    cs = evolved_correlator_set(ChainPoint(a, 20.0, 0.5))
    for q, ref in zip(FIELDS, EVOLVED_B20_G05[a]):
        assert cs.get(q) == pytest.approx(ref, abs=1e-9), q


@pytest.mark.parametrize("key", sorted(EQUILIBRIUM_G05))
def test_equilibrium_against_frozen_oracle(key):
    cs = equilibrium_correlator_set(ChainPoint(*key, 0.5))
    for q, ref in zip(FIELDS, EQUILIBRIUM_G05[key]):
        assert cs.get(q) == pytest.approx(ref, abs=1e-9), q


@settings(max_examples=20, deadline=None)
@given(beta=st.floats(0.01, 200.0), gamma=st.floats(0.05, 1.5))
def test_no_quench_identity(beta, gamma):
    p = ChainPoint(0.0, beta, gamma)
    ev, eq = evolved_correlator_set(p), equilibrium_correlator_set(p)
    for q in FIELDS:
        assert ev.get(q) == pytest.approx(eq.get(q), abs=1e-9)


@pytest.mark.parametrize("a", [0.0, 0.6, 2.0])
def test_infinite_temperature_kills_everything(a):
    p = ChainPoint(a, 0.0, 0.5)
    assert evolved_magnetization(p) == 0.0
    assert evolved_G(-1, p) == 0.0 and equilibrium_G(1, p) == 0.0


def test_tolerance_halving_self_convergence():
    p = ChainPoint(0.999, 80.0, 0.5)  # near-critical field: sharp integrand at phi = 0
    spec = QuadratureSpec()
    r1 = evolved_magnetization_result(p, spec)
    r2 = evolved_magnetization_result(p, spec.halved())
    assert abs(r1.value - r2.value) < 2 * max(r1.error, spec.abs_tol)


def test_strong_initial_field_saturates():
    # a -> inf: the initial state is fully polarized; the long-time value is the
    # projection of sigma^z onto the conserved modes, 1 / (1 + gamma) at zero temperature
    assert evolved_magnetization(ChainPoint(1e4, 20.0, 0.5)) == pytest.approx(2 / 3, abs=1e-3)
    assert equilibrium_magnetization(ChainPoint(1e4, 20.0, 0.5)) == pytest.approx(1.0, abs=1e-6)
    assert abs(equilibrium_G(-1, ChainPoint(1e4, 20.0, 0.5))) < 1e-3


@settings(max_examples=10, deadline=None)
@given(a=st.floats(0.0, 3.0), beta=st.floats(0.1, 50.0), gamma=st.floats(0.1, 1.0))
def test_gamma_sign_swaps_x_and_y(a, beta, gamma):
    for fn in (evolved_correlator_set, equilibrium_correlator_set):
        p, m = fn(ChainPoint(a, beta, gamma)), fn(ChainPoint(a, beta, -gamma))
        assert m.t_xx == pytest.approx(p.t_yy, abs=1e-9)
        assert m.t_yy == pytest.approx(p.t_xx, abs=1e-9)
        assert m.m_z == pytest.approx(p.m_z, abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(a=st.floats(0.0, 4.0), beta=st.floats(0.01, 100.0))
def test_correlators_describe_physical_states(a, beta):
    for fn in (evolved_correlator_set, equilibrium_correlator_set):
        rho = two_site_from_correlators(fn(ChainPoint(a, beta, 0.5)))
        assert np.linalg.eigvalsh(rho).min() >= 0
        assert 0 <= infinite_chain_entanglement(fn(ChainPoint(a, beta, 0.5))).e_n <= 1


def test_chain_point_validation():
    with pytest.raises(ValueError):
        ChainPoint(0.2, -1.0, 0.5)
    with pytest.raises(ValueError):
        ChainPoint(0.2, 1.0, 0.0)
    with pytest.warns(UserWarning):
        ChainPoint(0.2, 1.0, 1e-4)


def test_finite_chain_approaches_closed_form():
    from xyergodic.lattice import ModelParams, build_lattice
    from xyergodic.observables import correlators_from_table
    from xyergodic.quench import QuenchEngine

    eng = QuenchEngine(build_lattice("chain", (10,)), ModelParams(1.0, 0.5, 0.0))
    r = eng.initial_state_eigenbasis(0.6, 20.0)
    ed = correlators_from_table(eng.bond_series(eng.lattice.bonds[0], r, None).diagonal)
    exact = evolved_correlator_set(ChainPoint(0.6, 20.0, 0.5))
    for q in ("m_z", "t_xx", "t_yy"):
        assert ed.get(q) == pytest.approx(exact.get(q), abs=2e-3), q
