import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnnsim import circuits, objective
from qnnsim import statevector as sv
from qnnsim.encoding import AmplitudeEncoding, BlockEncoding
from qnnsim.objective import Hypothesis


def one_qubit_model():
    layer = circuits.param_rotation_layer(1, 0)
    tpl = circuits.CircuitTemplate(1, (layer,), 3)
    return Hypothesis(tpl, encoding=AmplitudeEncoding(num_qubits=1))


def small_model(n=3, depth=2, ent="cx", **kw):
    tpl = circuits.build_classifier(n, depth, ent)
    kw.setdefault("encoding", AmplitudeEncoding(num_qubits=n))
    return Hypothesis(tpl, **kw)


def test_measure_qubit_defaults_to_middle():
    assert small_model(n=3).measure_qubit == 2
    assert small_model(n=4).measure_qubit == 2
    assert small_model(n=10, depth=1).measure_qubit == 5
    assert one_qubit_model().measure_qubit == 1


def test_measure_qubit_validation():
    tpl = circuits.build_classifier(3, 1, "cx")
    with pytest.raises(ValueError):
        Hypothesis(tpl, measure_qubit=4)
    with pytest.raises(ValueError):
        Hypothesis(tpl, encoding=AmplitudeEncoding(num_qubits=2))
    with pytest.raises(ValueError):
        Hypothesis(tpl, encoding=BlockEncoding(scale=1.0, pad_to=5))


def test_hypothesis_identity_circuit():
    # all angles zero: the circuit is diagonal phases only, |0..0> sticks
    m = small_model(n=3, depth=1)
    g = objective.hypothesis(m, sv.zero_state(3), np.zeros(9))
    assert g[0] == pytest.approx(1.0, abs=1e-12)
    assert g[1] == pytest.approx(0.0, abs=1e-12)


def test_hypothesis_probabilities_complete():
    rng = np.random.default_rng(8)
    m = small_model()
    for _ in range(5):
        x = rng.normal(size=8)
        theta = rng.uniform(0, 2 * np.pi, m.template.num_params)
        g0, g1 = objective.hypothesis(m, x, theta)
        assert g0 + g1 == pytest.approx(1.0, abs=1e-12)
        assert g0 >= 0 and g1 >= 0


def test_loss_values():
    assert objective.loss([1, 0], (0.5, 0.5), "ce") == pytest.approx(np.log(2))
    assert objective.loss([1, 0], (0.5, 0.5), "mse") == pytest.approx(0.5)
    assert objective.loss([0, 1], (0.0, 1.0), "ce") == pytest.approx(0.0)
    assert objective.loss([0, 1], (0.0, 1.0), "mse") == pytest.approx(0.0)


def test_loss_clips_log():
    # g = 0 on the labeled class: clamp at EPSILON_CLIP, no inf
    got = objective.loss([1, 0], (0.0, 1.0), "ce")
    assert got == pytest.approx(-np.log(objective.EPSILON_CLIP))


def test_loss_label_validation():
    with pytest.raises(ValueError):
        objective.loss([0.5, 0.5], (0.5, 0.5))
    with pytest.raises(ValueError):
        objective.loss([1, 1], (0.5, 0.5))
    with pytest.raises(ValueError):
        objective.loss([1, 0, 0], (0.5, 0.5))
    with pytest.raises(ValueError):
        objective.loss([1, 0], (0.5, 0.5), "hinge")


def test_pauli_z_shift_at_half_pi():
    """d<Z>/dtheta of RX(theta)|0> is -sin(theta): exactly -1 at pi/2."""
    m = one_qubit_model()
    theta = np.array([0.0, np.pi / 2, 0.0])
    dg0, dg1 = objective.shift_gradient(m, sv.zero_state(1), theta, slot=1)
    assert dg0 - dg1 == pytest.approx(-1.0, abs=1e-12)
    # the two projector derivatives mirror each other
    assert dg0 + dg1 == pytest.approx(0.0, abs=1e-12)


def test_shift_gradient_slot_range():
    m = one_qubit_model()
    with pytest.raises(ValueError):
        objective.shift_gradient(m, sv.zero_state(1), np.zeros(3), slot=3)


def test_fd_plateau():
    """Central differences agree with parameter shifts across eps decades."""
    rng = np.random.default_rng(5)
    m = small_model(n=2, depth=1)
    x = rng.normal(size=4)
    theta = rng.uniform(0, 2 * np.pi, m.template.num_params)
    a = np.array([1.0, 0.0])
    exact = objective.loss_gradient(m, x, a, theta, "ce")
    devs = [
        np.abs(
            objective.fd_gradient_oracle(m, x, a, theta, "ce", delta=d) - exact
        ).max()
        for d in (1e-4, 1e-5, 1e-6)
    ]
    assert all(d < 1e-6 for d in devs)
    # truncation shrinks from 1e-4 to 1e-5; roundoff stays below the plateau
    assert devs[1] <= devs[0] + 1e-9


@settings(deadline=None, max_examples=25)
@given(st.integers(min_value=0, max_value=10_000))
def test_loss_gradient_matches_fd(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    depth = int(rng.integers(1, 3))
    ent = ["cz", "cx", "cx2"][int(rng.integers(3))]
    kind = ["ce", "mse"][int(rng.integers(2))]
    label = np.zeros(2)
    label[int(rng.integers(2))] = 1.0
    if rng.integers(2):
        m = small_model(n=n, depth=depth, ent=ent)
        x = rng.normal(size=2**n)
    else:
        tpl = circuits.build_classifier(n, depth, ent)
        m = Hypothesis(
            tpl, encoding=BlockEncoding(scale=1.5, pad_to=tpl.num_params)
        )
        x = rng.normal(size=int(rng.integers(2, tpl.num_params + 1)))
    theta = rng.uniform(0, 2 * np.pi, m.template.num_params)
    got = objective.loss_gradient(m, x, label, theta, kind)
    want = objective.fd_gradient_oracle(m, x, label, theta, kind)
    np.testing.assert_allclose(got, want, atol=1e-6)


def test_loss_gradient_block_encoding_offsets():
    # data enters as theta + c*x, so dL/dtheta at theta equals the plain
    # gradient at the combined angles
    tpl = circuits.build_classifier(2, 1, "cx")
    rng = np.random.default_rng(3)
    x = rng.normal(size=6)
    theta = rng.uniform(0, 2 * np.pi, 6)
    m_block = Hypothesis(tpl, encoding=BlockEncoding(scale=2.0, pad_to=6))
    m_plain = Hypothesis(tpl)
    a = np.array([0.0, 1.0])
    got = objective.loss_gradient(m_block, x, a, theta, "mse")
    want = objective.loss_gradient(
        m_plain, sv.zero_state(2), a, theta + 2.0 * x, "mse"
    )
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_batch_gradient_is_mean_of_singles():
    rng = np.random.default_rng(44)
    m = small_model(n=3, depth=2)
    nb = 4
    states = rng.normal(size=(nb, 8)) + 1j * rng.normal(size=(nb, 8))
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    theta = rng.uniform(0, 2 * np.pi, m.template.num_params)
    labels = np.zeros((nb, 2))
    labels[: nb // 2, 0] = 1.0
    labels[nb // 2:, 1] = 1.0
    bg = objective.batch_gradient(m, states, theta, labels, "ce")
    assert bg.evals == nb * (2 * m.template.num_params + 1)
    singles = [
        objective.loss_gradient(
            m, sv.from_amplitudes(states[b], 3), labels[b], theta, "ce"
        )
        for b in range(nb)
    ]
    np.testing.assert_allclose(bg.grad, np.mean(singles, axis=0), atol=1e-12)
    for b in range(nb):
        want = objective.loss(
            labels[b], objective.hypothesis(m, sv.from_amplitudes(states[b], 3), theta)
        )
        assert bg.losses[b] == pytest.approx(want, abs=1e-12)


def test_batch_hypothesis_matches_reference():
    rng = np.random.default_rng(50)
    m = small_model(n=3, depth=1, ent="cz")
    states = rng.normal(size=(3, 8)) + 1j * rng.normal(size=(3, 8))
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    theta = rng.uniform(0, 2 * np.pi, m.template.num_params)
    got = objective.batch_hypothesis(m, states, theta)
    for b in range(3):
        want = objective.hypothesis(m, sv.from_amplitudes(states[b], 3), theta)
        np.testing.assert_allclose(got[b], want, atol=1e-12)


def test_input_state_requires_encoding_for_real_input():
    tpl = circuits.build_classifier(2, 1, "cx")
    m = Hypothesis(tpl)  # no encoding
    with pytest.raises(ValueError, match="encoding"):
        objective.hypothesis(m, np.ones(4), np.zeros(6))
