import math

import pytest

from nhrouter.zeeman import ZeemanScheme, clebsch_gordan, dipole_weight_table

from oracles import CG_SIGMA_PLUS_2_3


@pytest.mark.parametrize(
    "args, value",
    [
        ((2, 2, 1, 1, 3, 3), 1.0),
        ((1, 0, 1, 0, 2, 0), math.sqrt(2 / 3)),
        ((0.5, 0.5, 0.5, -0.5, 1, 0), math.sqrt(0.5)),
        ((0.5, 0.5, 0.5, -0.5, 0, 0), math.sqrt(0.5)),
        ((1, 1, 1, -1, 0, 0), math.sqrt(1 / 3)),
        ((1, 0, 1, 0, 1, 0), 0.0),
    ],
)
def test_clebsch_gordan_known_values(args, value):
    assert clebsch_gordan(*args) == pytest.approx(value, abs=1e-14)


def test_clebsch_gordan_selection_rules():
    assert clebsch_gordan(1, 1, 1, 1, 1, 1) == 0.0  # m mismatch
    assert clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0  # triangle


def test_sigma_plus_weights_f2_f3():
    s = ZeemanScheme()
    got = [sub.weight for sub in s.subsystems(+1)]
    assert got == pytest.approx(CG_SIGMA_PLUS_2_3, abs=1e-14)
    # mirror symmetry of sigma-
    assert [sub.weight for sub in s.subsystems(-1)] == pytest.approx(CG_SIGMA_PLUS_2_3[::-1], abs=1e-14)


def test_weight_table_normalized_and_selection_rule():
    t = dipole_weight_table(2, 3)
    assert max(t.values()) == 1.0
    assert all(abs(m - n) <= 1 for m, n in t)


def test_cycling_pair_is_stretched_transition():
    c = ZeemanScheme().cycling_pair()
    assert (c.excited_m, c.ground_m) == (-3, -2)
    assert c.weight == pytest.approx(1.0)


def test_population_validation():
    with pytest.raises(ValueError):
        ZeemanScheme(populations=(0.5, 0.5))
    with pytest.raises(ValueError):
        ZeemanScheme(populations=(0.3, 0.3, 0.3, 0.1, 0.1))
    with pytest.raises(ValueError):
        ZeemanScheme(populations=(1.2, -0.2, 0, 0, 0))
    s = ZeemanScheme(populations=(1, 0, 0, 0, 0))
    assert s.population(-2) == 1.0


def test_custom_weights_reject_forbidden_transitions():
    with pytest.raises(ValueError):
        ZeemanScheme(dipole_weights={(2, 0): 0.5})
