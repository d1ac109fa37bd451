import pytest

from config import MODELS_DIR
from model_parser import load_model, parse_model

UNTIMED_MODEL = """
component R
  location l0 initial
  location l1
  edge l0 -> l0 on a
  edge l0 -> l1 on b
  edge l1 -> l1 on c
  edge l1 -> l0 on b
end

system
  instance r R
  interaction ia = r.a
  interaction ib = r.b
  interaction ic = r.c
end
"""

TWO_CLOCK_MODEL = """
component Blinker
  clock x, y
  location dark initial
  location lit tpc x <= 3
  edge dark -> lit on start guard y >= 2 reset x
  edge lit -> dark on stop guard x >= 1 and y - x <= 5 reset y
end

system
  instance b Blinker
  interaction go = b.start
  interaction halt = b.stop
  property bounded: b@lit implies b.x <= 3
end
"""


@pytest.fixture(scope="session")
def bundled():
    """Loader for models shipped under models/."""
    cache = {}

    def load(name):
        if name not in cache:
            cache[name] = load_model(MODELS_DIR / f"{name}.tinv")
        return cache[name]

    return load


@pytest.fixture
def wc1(bundled):
    return bundled("worker_controller_1")


@pytest.fixture
def wc2(bundled):
    return bundled("worker_controller_2")


@pytest.fixture
def tc1(bundled):
    return bundled("temp_controller_1")


@pytest.fixture
def untimed_model():
    return parse_model(UNTIMED_MODEL, source="untimed")


@pytest.fixture
def blinker_model():
    return parse_model(TWO_CLOCK_MODEL, source="blinker")
