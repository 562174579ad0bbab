import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhrouter.errors import FullyBlocked
from nhrouter.model import Direction, RoutingParams
from nhrouter.qubit import (
    NAMED_STATES,
    DualRailChannel,
    RailImbalance,
    Scrambling,
    apply_channel,
    bloch_to_rho,
    encode,
    fidelity,
    fit_scrambling,
    rho_to_bloch,
)
from nhrouter.zeeman import ZeemanScheme


def test_encode_basis_states():
    assert np.allclose(encode(0, 0).vector, [1, 0])
    assert np.allclose(encode(math.pi, 0).vector, [0, 1], atol=1e-16)
    r = encode(math.pi / 2, math.pi / 2).vector
    assert np.allclose(r, np.array([1, 1j]) / math.sqrt(2))
    with pytest.raises(ValueError):
        encode(-0.1, 0)
    with pytest.raises(ValueError):
        encode(3.5, 0)


@settings(max_examples=50, deadline=None)
@given(theta=st.floats(0, math.pi), phi=st.floats(-10, 10))
def test_encode_normalized(theta, phi):
    assert abs(np.linalg.norm(encode(theta, phi).vector) - 1) < 1e-12


def test_identity_channel():
    q = encode(1.1, 0.4)
    r = apply_channel(q, DualRailChannel(1, 1))
    assert np.allclose(r.rho_out, q.density_matrix())
    assert r.success_prob == pytest.approx(1.0) and r.fidelity == pytest.approx(1.0)


def test_projector_channel():
    r = apply_channel(NAMED_STATES["D"], DualRailChannel(1, 0))
    assert np.allclose(r.rho_out, [[1, 0], [0, 0]])
    assert r.success_prob == pytest.approx(0.5) and r.fidelity == pytest.approx(0.5)


def test_uniform_loss_channel():
    h = math.sqrt(0.93)
    r = apply_channel(NAMED_STATES["H"], DualRailChannel(h, h))
    assert r.success_prob == pytest.approx(0.93) and r.fidelity == pytest.approx(1.0)


def test_channel_validation_and_blocking():
    with pytest.raises(ValueError):
        DualRailChannel(1.1, 0.5)
    with pytest.raises(FullyBlocked):
        apply_channel(NAMED_STATES["H"], DualRailChannel(0, 1))


def test_fidelity_examples():
    assert fidelity(np.diag([1, 0]), NAMED_STATES["H"]) == 1.0
    for s in NAMED_STATES.values():
        assert fidelity(np.eye(2) / 2, s) == pytest.approx(0.5)


def _sphere(n=100):
    # Fibonacci grid on the Poincare sphere
    k = np.arange(n) + 0.5
    return [encode(math.acos(1 - 2 * x / n), (math.pi * (1 + 5**0.5) * x) % (2 * math.pi)) for x in k]


def test_equal_rails_preserve_every_state():
    ch = DualRailChannel(0.9 * np.exp(0.7j), 0.9 * np.exp(0.7j))
    for q in _sphere():
        assert apply_channel(q, ch).fidelity == pytest.approx(1.0, abs=1e-12)


def test_success_probability_of_rails():
    ch = DualRailChannel(0.8 * np.exp(0.3j), 0.6j)
    assert apply_channel(NAMED_STATES["H"], ch).success_prob == abs(ch.h_H) ** 2
    assert apply_channel(NAMED_STATES["V"], ch).success_prob == abs(ch.h_V) ** 2


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), w=st.floats(0, 1), p=st.floats(0, 1))
def test_channel_linear_on_mixtures(seed, w, p):
    rng = np.random.default_rng(seed)

    def rand_rho():
        r = rng.normal(size=3)
        return bloch_to_rho(r / max(1.0, np.linalg.norm(r)))

    a, b = rand_rho(), rand_rho()
    bg = rng.normal(size=3)
    bg = bg / max(1.0, np.linalg.norm(bg))
    ch = DualRailChannel(0.9 * np.exp(1j * rng.uniform(0, 6)), 0.5 * np.exp(1j * rng.uniform(0, 6)),
                         scrambling=Scrambling(p, tuple(bg)))
    mix = ch.unnormalized_output(w * a + (1 - w) * b)
    sep = w * ch.unnormalized_output(a) + (1 - w) * ch.unnormalized_output(b)
    assert np.allclose(mix, sep, atol=1e-14)


def test_scrambling_keeps_success_probability():
    q = NAMED_STATES["D"]
    clean = DualRailChannel(0.9, 0.7)
    noisy = DualRailChannel(0.9, 0.7, scrambling=Scrambling(0.3, (0.1, 0.2, -0.3)))
    assert apply_channel(q, noisy).success_prob == pytest.approx(apply_channel(q, clean).success_prob, rel=1e-14)
    with pytest.raises(ValueError):
        Scrambling(0.5, (1.0, 1.0, 0))
    with pytest.raises(ValueError):
        Scrambling(1.5)


def test_rail_imbalance_from_losses():
    imb = RailImbalance.from_insertion_losses(0.36, 0.18)
    t_h, t_v = 0.94 * (1 - imb.amplitude), 0.94 * (1 + imb.amplitude)
    assert -10 * math.log10(t_h / t_v) == pytest.approx(0.18, rel=1e-12)


def test_from_model_uses_shared_susceptibility():
    p = RoutingParams(omega_c=1.0, omega_diss=1.5, gamma_gs=0.002)
    ch = DualRailChannel.from_model(Direction.FORWARD, ZeemanScheme(), p, 14.0)
    assert ch.h_H == ch.h_V
    imb = RailImbalance(0.02, 0.1)
    ch2 = DualRailChannel.from_model(Direction.FORWARD, ZeemanScheme(), p, 14.0, imbalance=imb)
    assert abs(ch2.h_H) ** 2 == pytest.approx(abs(ch.h_H) ** 2 * 0.98, rel=1e-12)
    assert np.angle(ch2.h_V / ch2.h_H) == pytest.approx(0.1, rel=1e-12)


def test_fit_scrambling_reproduces_targets():
    ch = DualRailChannel(math.sqrt(0.92), math.sqrt(0.96))
    states = [NAMED_STATES[s] for s in "HVDR"]
    targets = (0.92, 0.97, 0.93, 0.94)
    scr = fit_scrambling(ch, states, targets)
    noisy = DualRailChannel(ch.h_H, ch.h_V, scrambling=scr)
    got = [apply_channel(s, noisy).fidelity for s in states]
    assert got == pytest.approx(targets, abs=1e-12)
    assert np.linalg.norm(rho_to_bloch(scr.background())) <= 1
