import math

import numpy as np
import pytest

from darkfilter import NetworkSpec, default_bath_sites, mix
from darkfilter.config import fig2_network
from darkfilter.engines import dark_state
from darkfilter.fock import fock_state

FIG1_J, FIG1_KAPPA, FIG1_DELTA = 5.4, 2.0, 1.0
FIG2_J, FIG2_KAPPA = 10.0, 2.0
FIG2_BIAS = math.sqrt(2.0) * FIG2_J


def dimer(J=FIG1_J, kappa=FIG1_KAPPA, delta=FIG1_DELTA, z_max=6.0, bath_sites=None):
    L = bath_sites if bath_sites is not None else default_bath_sites(J, z_max)
    return NetworkSpec("dimer_edge_coupled", J, (kappa, kappa), (0.0, 0.0), L, delta=delta)


@pytest.fixture
def fig1_spec():
    return dimer()


@pytest.fixture
def fig2_spec():
    return fig2_network(FIG2_J, FIG2_KAPPA, 15.0)


@pytest.fixture
def fig1_input(fig1_spec):
    return mix([(0.6, fock_state((2, 0))), (0.4, dark_state(fig1_spec, 2))])


@pytest.fixture
def fig2_input(fig2_spec):
    return mix([(0.6, fock_state((1, 0, 0))), (0.4, dark_state(fig2_spec, 1))])


@pytest.fixture
def rng():
    return np.random.default_rng(20251019)
