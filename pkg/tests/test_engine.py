import numpy as np
import pytest

from qnnsim import circuits, engine, spin_models
from qnnsim import statevector as sv


def random_states(rng, nb, n):
    amp = rng.normal(size=(nb, 2**n)) + 1j * rng.normal(size=(nb, 2**n))
    return amp / np.linalg.norm(amp, axis=1, keepdims=True)


def reference_probs(template, angles, amp, qubit):
    state = sv.from_amplitudes(amp, template.num_qubits)
    out = circuits.run(template, angles, state)
    return np.array(sv.measure_probabilities(out, qubit))


def naive_shift_grad(template, angles, amp, qubit):
    """Whole-circuit parameter shifts through the reference path."""
    grad = np.empty((template.num_params, 2))
    for k in range(template.num_params):
        plus = angles.copy()
        plus[k] += np.pi / 2
        minus = angles.copy()
        minus[k] -= np.pi / 2
        grad[k] = 0.5 * (
            reference_probs(template, plus, amp, qubit)
            - reference_probs(template, minus, amp, qubit)
        )
    return grad


def test_rot_mats_closed_form():
    rng = np.random.default_rng(0)
    th = rng.uniform(-2 * np.pi, 2 * np.pi, size=(5, 3))
    got = engine.rot_mats(th)
    for i, (a, b, c) in enumerate(th):
        want = (
            sv.rotation_matrix("rz", c)
            @ sv.rotation_matrix("rx", b)
            @ sv.rotation_matrix("rz", a)
        )
        np.testing.assert_allclose(got[i], want, atol=1e-14)


@pytest.mark.parametrize("ent", ["cz", "cx", "cx2", "analog"])
def test_forward_matches_reference(ent):
    rng = np.random.default_rng(4)
    n, depth, nb = 4, 3, 5
    if ent == "analog":
        ent = circuits.analog_layer(spin_models.aubry_andre(n, 1.0, 0.8, 0.1), 0.6)
    tpl = circuits.build_classifier(n, depth, ent)
    cc = engine.compile_template(tpl)
    angles = rng.uniform(0, 2 * np.pi, tpl.num_params)
    states = random_states(rng, nb, n)
    out, _ = cc.forward(states.copy(), angles)
    for b in range(nb):
        want = circuits.run(tpl, angles, sv.from_amplitudes(states[b], n))
        np.testing.assert_allclose(out[b], want.amplitudes, atol=1e-12)


def test_forward_per_sample_angles():
    rng = np.random.default_rng(9)
    n, nb = 3, 4
    tpl = circuits.build_classifier(n, 2, "cx")
    cc = engine.compile_template(tpl)
    angles = rng.uniform(0, 2 * np.pi, size=(nb, tpl.num_params))
    states = random_states(rng, nb, n)
    out, _ = cc.forward(states.copy(), angles)
    for b in range(nb):
        want = circuits.run(tpl, angles[b], sv.from_amplitudes(states[b], n))
        np.testing.assert_allclose(out[b], want.amplitudes, atol=1e-12)


def test_probabilities_match_reference():
    rng = np.random.default_rng(12)
    n = 4
    tpl = circuits.build_classifier(n, 2, "cz")
    cc = engine.compile_template(tpl)
    angles = rng.uniform(0, 2 * np.pi, tpl.num_params)
    states = random_states(rng, 3, n)
    for q in range(1, n + 1):
        got = cc.probabilities(states.copy(), angles, q)
        for b in range(3):
            want = reference_probs(tpl, angles, states[b], q)
            np.testing.assert_allclose(got[b], want, atol=1e-12)
        np.testing.assert_allclose(got.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("ent", ["cz", "cx", "cx2", "analog"])
def test_gradient_matches_naive_shifts(ent):
    rng = np.random.default_rng(21)
    n, depth, nb = 3, 2, 3
    if ent == "analog":
        ent = circuits.analog_layer(spin_models.aubry_andre(n, 1.0, 0.0, 0.0), 0.9)
    tpl = circuits.build_classifier(n, depth, ent)
    cc = engine.compile_template(tpl)
    angles = rng.uniform(0, 2 * np.pi, tpl.num_params)
    states = random_states(rng, nb, n)
    qubit = 2
    g, dg, evals = cc.gradient(states.copy(), angles, qubit)
    assert evals == nb * (2 * tpl.num_params + 1)
    for b in range(nb):
        np.testing.assert_allclose(
            g[b], reference_probs(tpl, angles, states[b], qubit), atol=1e-12
        )
        want = naive_shift_grad(tpl, angles, states[b], qubit)
        np.testing.assert_allclose(dg[b], want, atol=1e-12)


def test_gradient_per_sample_angles():
    # block encoding runs with a different angle vector per sample
    rng = np.random.default_rng(33)
    n, nb = 3, 4
    tpl = circuits.build_classifier(n, 2, "cx")
    cc = engine.compile_template(tpl)
    angles = rng.uniform(0, 2 * np.pi, size=(nb, tpl.num_params))
    states = random_states(rng, nb, n)
    g, dg, evals = cc.gradient(states.copy(), angles, 1)
    assert evals == nb * (2 * tpl.num_params + 1)
    for b in range(nb):
        want = naive_shift_grad(tpl, angles[b], states[b], 1)
        np.testing.assert_allclose(dg[b], want, atol=1e-12)
        np.testing.assert_allclose(
            g[b], reference_probs(tpl, angles[b], states[b], 1), atol=1e-12
        )


def test_angle_shape_errors():
    tpl = circuits.build_classifier(2, 1, "cx")
    cc = engine.CompiledCircuit(tpl)
    states = np.zeros((1, 4), dtype=np.complex128)
    states[0, 0] = 1.0
    with pytest.raises(ValueError):
        cc.forward(states, np.zeros(5))
    with pytest.raises(ValueError):
        cc.forward(states, np.zeros((1, 5)))
    with pytest.raises(ValueError):
        cc.forward(states, np.zeros((1, 1, 6)))


def test_compile_template_caches():
    tpl = circuits.build_classifier(3, 2, "cz")
    assert engine.compile_template(tpl) is engine.compile_template(tpl)
