import importlib.resources
import random

import pytest
import sympy as sp

from walkervsi import expr as ex
from walkervsi import walker as wk

_u, _v, _U, _V = ex.COORD_SYMS


def bundled(name: str) -> wk.WalkerSpec:
    ref = importlib.resources.files("walkervsi") / "specs" / (name + ".wspec")
    return wk.load_spec(ref.read_text(), is_text=True)


def random_poly(rng: random.Random, degree=1):
    """Small random polynomial in u, U with rational coefficients."""
    terms = [sp.S.One, _u, _U]
    if degree >= 2:
        terms += [_u * _U, _u**2, _U**2]
    e = sp.S.Zero
    for t in terms:
        if rng.random() < 0.5:
            e += sp.Rational(rng.randint(-3, 3), rng.randint(1, 3)) * t
    return e


def random_spec(rng: random.Random, keys=None) -> wk.WalkerSpec:
    """Random Walker spec with polynomial coefficient functions of (u, U)."""
    keys = keys or wk.COEFF_KEYS
    kw = {}
    for k in keys:
        if rng.random() < 0.6:
            kw[k] = random_poly(rng)
    return wk.WalkerSpec(family="random", **kw)


def random_point(rng: random.Random):
    """A generic chart point away from coordinate singularities."""
    return {
        "u": sp.Rational(rng.randint(1, 9), rng.randint(1, 4)),
        "v": sp.Rational(rng.randint(-9, 9), rng.randint(1, 4)),
        "U": sp.Rational(rng.randint(1, 9), rng.randint(1, 4)),
        "V": sp.Rational(rng.randint(-9, 9), rng.randint(1, 4)),
    }


@pytest.fixture(scope="session")
def ex1_generic():
    return bundled("example1-generic")


@pytest.fixture(scope="session")
def ex1_ricciflat():
    return bundled("example1-ricciflat")


@pytest.fixture(scope="session")
def ex2_generic():
    return bundled("example2-generic")


@pytest.fixture(scope="session")
def ex2_subcase():
    return bundled("example2-subcase")


@pytest.fixture(scope="session")
def flat_spec():
    return bundled("flat")
