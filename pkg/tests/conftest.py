import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lamhom.materials import Laminate, PhaseProperties, make_isotropic_phase

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

positive = st.floats(min_value=0.05, max_value=20.0, allow_nan=False)
signed = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)
poisson = st.floats(min_value=-0.5, max_value=0.45)


@st.composite
def isotropic_phases(draw, assumption="plane-stress"):
    return make_isotropic_phase(
        draw(positive), draw(poisson), draw(signed), draw(signed), draw(positive), draw(positive), assumption
    )


@st.composite
def orthotropic_phases(draw):
    c11, c22, c66 = draw(positive), draw(positive), draw(positive)
    # coupling strictly inside the positive-definite cone
    c12 = draw(st.floats(min_value=-0.95, max_value=0.95)) * np.sqrt(c11 * c22)
    return PhaseProperties(
        C1111=c11, C2222=c22, C1122=c12, C1212=c66,
        alpha11=draw(signed), alpha22=draw(signed), beta11=draw(signed), beta22=draw(signed),
        K11=draw(positive), K22=draw(positive), D11=draw(positive), D22=draw(positive),
    )


phases = st.one_of(isotropic_phases(), isotropic_phases("plane-strain"), orthotropic_phases())
zetas = st.floats(min_value=0.05, max_value=20.0)


@st.composite
def biphase_laminates(draw):
    return Laminate.biphase(draw(phases), draw(phases), draw(zetas))


@st.composite
def multilayer_laminates(draw, max_layers=6):
    n = draw(st.integers(min_value=1, max_value=max_layers))
    weights = np.array(draw(st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=n, max_size=n)))
    fractions = weights / weights.sum()
    fractions[-1] = 1.0 - fractions[:-1].sum()
    return Laminate.from_phases([draw(phases) for _ in range(n)], fractions)


def random_phase(rng: np.random.Generator, orthotropic: bool) -> PhaseProperties:
    if not orthotropic:
        return make_isotropic_phase(
            rng.uniform(0.1, 10.0), rng.uniform(-0.4, 0.45), rng.uniform(-2, 2), rng.uniform(-2, 2),
            rng.uniform(0.1, 10.0), rng.uniform(0.1, 10.0), rng.choice(["plane-stress", "plane-strain"]),
        )
    c11, c22, c66 = rng.uniform(0.1, 10.0, 3)
    return PhaseProperties(
        C1111=c11, C2222=c22, C1122=rng.uniform(-0.9, 0.9) * np.sqrt(c11 * c22), C1212=c66,
        alpha11=rng.uniform(-2, 2), alpha22=rng.uniform(-2, 2), beta11=rng.uniform(-2, 2), beta22=rng.uniform(-2, 2),
        K11=rng.uniform(0.1, 10), K22=rng.uniform(0.1, 10), D11=rng.uniform(0.1, 10), D22=rng.uniform(0.1, 10),
    )


def backus_oracle(laminate: Laminate) -> dict:
    """Textbook layered-medium averages, written independently of the package."""
    f = laminate.fractions
    col = laminate.column
    avg = lambda v: float(np.dot(f, v))
    c22 = 1.0 / avg(1.0 / col("C2222"))
    r = avg(col("C1122") / col("C2222"))
    a22 = c22 * avg(col("alpha22") / col("C2222"))
    b22 = c22 * avg(col("beta22") / col("C2222"))
    return {
        "C2222": c22,
        "C1122": r * c22,
        "C1111": avg(col("C1111") - col("C1122") ** 2 / col("C2222")) + r * r * c22,
        "C1212": 1.0 / avg(1.0 / col("C1212")),
        "alpha22": a22,
        "alpha11": avg(col("alpha11") - col("C1122") * col("alpha22") / col("C2222")) + r * a22,
        "beta22": b22,
        "beta11": avg(col("beta11") - col("C1122") * col("beta22") / col("C2222")) + r * b22,
        "K11": avg(col("K11")),
        "K22": 1.0 / avg(1.0 / col("K22")),
        "D11": avg(col("D11")),
        "D22": 1.0 / avg(1.0 / col("D22")),
    }


def assert_constants_close(eff, expected: dict, rtol: float, atol_scale: float = 0.0):
    for name, value in expected.items():
        got = eff.get(name)
        scale = max(abs(value), atol_scale)
        assert abs(got - value) <= rtol * scale, f"{name}: {got} vs {value}"


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
