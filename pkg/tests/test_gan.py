import math

import numpy as np
import pytest

from hqgan.circuits import build_generator, stacked_encoder
from hqgan.data import make_rng, sample_noise, sample_uniform, two_moons
from hqgan.gan import (CLAMP, ChainParams, DiscriminatorModel, GeneratorModel, TrainConfig, TrainingDiverged,
                       bce_loss, classifier_gradient, disc_loss, disc_loss_gradient, discriminator_output,
                       gen_loss, gen_loss_gradient, generator_output, sgd_update, train_classifier, train_gan)


def _models(seed=0, stages=1):
    rng = np.random.default_rng(seed)
    g = GeneratorModel(build_generator(), rng.uniform(0, 2 * math.pi, 11))
    d_circ = stacked_encoder(stages, "E1")
    d = DiscriminatorModel(d_circ, rng.uniform(0, 2 * math.pi, d_circ.num_trainable))
    return g, d, rng


def _fd(f, theta, eps=1e-5):
    out = np.empty_like(theta)
    for i in range(theta.size):
        up, dn = theta.copy(), theta.copy()
        up[i] += eps
        dn[i] -= eps
        out[i] = (f(up) - f(dn)) / (2 * eps)
    return out


# --- outputs ------------------------------------------------------------------

def test_generator_output_examples():
    g = GeneratorModel(build_generator(), np.zeros(11))
    np.testing.assert_allclose(generator_output(g, [0, 0]), [1, 1], atol=1e-15)
    np.testing.assert_allclose(generator_output(g, [1, 1]), [0, 0], atol=1e-15)


def test_outputs_in_unit_interval():
    g, d, rng = _models(1, 5)
    x = rng.uniform(size=(1000, 2))
    out = discriminator_output(d, x)
    assert out.shape == (1000,) and out.min() >= 0 and out.max() <= 1
    gz = generator_output(g, x)
    assert gz.min() >= 0 and gz.max() <= 1
    assert isinstance(discriminator_output(d, [0.2, 0.3]), float)


def test_model_length_checked():
    with pytest.raises(ValueError):
        GeneratorModel(build_generator(), np.zeros(10))


# --- losses -------------------------------------------------------------------

def _half_disc():
    # H on the readout then nothing: D = 1/2 for every input
    from hqgan.circuits import Circuit, GateSpec
    return DiscriminatorModel(Circuit(2, [GateSpec("H", (0,))], 0, 2), np.zeros(0))


def test_disc_loss_at_half():
    d = _half_disc()
    rng = np.random.default_rng(0)
    assert disc_loss(d, rng.uniform(size=(5, 2)), rng.uniform(size=(7, 2))) == pytest.approx(2 * math.log(2),
                                                                                            abs=1e-9)


def test_gen_loss_at_half():
    g, _, rng = _models()
    assert gen_loss(g, _half_disc(), rng.uniform(size=(4, 2))) == pytest.approx(math.log(2), abs=1e-9)


def test_losses_at_perfect_discriminator():
    from hqgan.circuits import Circuit, GateSpec
    ones = DiscriminatorModel(Circuit(2, [], 0, 2), np.zeros(0))  # D = 1 everywhere
    expected = -math.log(1 - CLAMP) - math.log(CLAMP)
    assert disc_loss(ones, [[0.1, 0.2]], [[0.3, 0.4]]) == pytest.approx(expected, rel=1e-12)
    g, _, _ = _models()
    assert gen_loss(g, ones, [[0.1, 0.2]]) == pytest.approx(-math.log(1 - CLAMP), abs=1e-12)
    assert gen_loss(g, ones, [[0.1, 0.2]]) < 1e-6


def test_bce_loss():
    d = _half_disc()
    assert bce_loss(d, [[0.1, 0.2], [0.5, 0.5]], [0, 1]) == pytest.approx(math.log(2), abs=1e-12)


# --- gradient chains against finite differences of the full loss --------------

def test_disc_loss_gradient_matches_finite_differences():
    g, d, rng = _models(2)
    real, z = rng.uniform(size=(2, 2)), rng.uniform(size=(2, 2))
    fake = generator_output(g, z)
    grad = disc_loss_gradient(d, g, real, z)
    fd = _fd(lambda th: disc_loss(DiscriminatorModel(d.circuit, th), real, fake), d.theta)
    np.testing.assert_allclose(grad, fd, atol=1e-5)


@pytest.mark.parametrize("seed", [3, 4, 5])
def test_gen_loss_gradient_matches_finite_differences(seed):
    g, d, rng = _models(seed)
    z = rng.uniform(size=(2, 2))
    grad = gen_loss_gradient(g, d, z)
    fd = _fd(lambda th: gen_loss(GeneratorModel(g.circuit, th), d, z), g.theta)
    np.testing.assert_allclose(grad, fd, atol=1e-5)


def test_classifier_gradient_matches_finite_differences():
    _, d, rng = _models(6, 2)
    x, y = rng.uniform(size=(3, 2)), np.array([0, 1, 1])
    fd = _fd(lambda th: bce_loss(DiscriminatorModel(d.circuit, th), x, y), d.theta)
    np.testing.assert_allclose(classifier_gradient(d, x, y), fd, atol=1e-5)


def test_single_shift_chain_is_an_approximation():
    g, d, rng = _models(7)
    z = rng.uniform(size=(4, 2))
    exact = gen_loss_gradient(g, d, z)
    single = gen_loss_gradient(g, d, z, ChainParams(), "paper")
    assert single.shape == exact.shape and np.all(np.isfinite(single))
    # the single-shift estimate is coarse but should point roughly the same way
    assert np.dot(single, exact) > 0
    with pytest.raises(ValueError):
        gen_loss_gradient(g, d, z, grad_mode="nope")


def test_chain_params_bounds():
    with pytest.raises(ValueError):
        ChainParams(delta_G=0.0)
    with pytest.raises(ValueError):
        ChainParams(delta_G=4.0)


# --- SGD and config -----------------------------------------------------------

def test_sgd_update():
    np.testing.assert_array_equal(sgd_update([0.0], [1.0], 0.01), [-0.01])
    np.testing.assert_array_equal(sgd_update([0.3, 0.4], [0.0, 0.0], 0.5), [0.3, 0.4])
    with pytest.raises(ValueError):
        sgd_update([0.0], [1.0, 2.0], 0.1)


@pytest.mark.parametrize("kwargs", [{"batch_size": 0}, {"epochs": -1}, {"alpha_D": -0.1},
                                    {"grad_mode": "fast"}, {"init": "identity"}])
def test_bad_config(kwargs):
    with pytest.raises(ValueError):
        TrainConfig(**kwargs)


# --- training loops -----------------------------------------------------------

def _real(n=20, seed=0):
    return sample_uniform(n, 0.4, 0.6, make_rng(seed))


def test_zero_epochs_leaves_parameters():
    tr = train_gan(TrainConfig(epochs=0, eval_samples=50), _real(), make_rng(1),
                   discriminator=stacked_encoder(1, "E1"))
    assert tr.epochs == 0 and tr.to_csv().count("\n") == 1
    np.testing.assert_array_equal(tr.theta_G, tr.initial_theta_G)
    np.testing.assert_array_equal(tr.theta_D, tr.initial_theta_D)


def test_zero_learning_rate_is_bitwise_identity():
    cfg = TrainConfig(alpha_D=0.0, alpha_G=0.0, epochs=2, eval_samples=50)
    tr = train_gan(cfg, _real(), make_rng(2), discriminator=stacked_encoder(1, "E1"))
    assert tr.theta_G.tobytes() == tr.initial_theta_G.tobytes()
    assert tr.theta_D.tobytes() == tr.initial_theta_D.tobytes()


def test_training_is_deterministic():
    cfg = TrainConfig(epochs=3, eval_samples=100)
    runs = [train_gan(cfg, _real(), make_rng(5), discriminator=stacked_encoder(2, "E1")) for _ in range(2)]
    assert runs[0].to_csv() == runs[1].to_csv()
    np.testing.assert_array_equal(runs[0].final_samples, runs[1].final_samples)
    other = train_gan(cfg, _real(), make_rng(6), discriminator=stacked_encoder(2, "E1"))
    assert other.to_csv() != runs[0].to_csv()


def test_trace_shape_and_csv():
    tr = train_gan(TrainConfig(epochs=2, eval_samples=100), _real(30), make_rng(3),
                   discriminator=stacked_encoder(1, "E2"))
    assert len(tr.disc_loss) == len(tr.gen_loss) == len(tr.kl) == len(tr.js) == 2
    lines = tr.to_csv().splitlines()
    assert lines[0] == "epoch,disc_loss,gen_loss,disc_grad_norm,gen_grad_norm,kl,js"
    assert len(lines) == 3 and lines[1].startswith("1,")
    assert all(np.isfinite(tr.disc_loss)) and tr.final_samples.shape == (100, 2)


def test_single_shift_with_adaptation_runs():
    tr = train_gan(TrainConfig(epochs=1, grad_mode="paper", eval_samples=50), _real(), make_rng(4),
                   discriminator=stacked_encoder(1, "E1"), chain=ChainParams(adapt=True))
    assert tr.chain.adapt
    assert (tr.chain.k_G, tr.chain.delta_G) != (0.5, math.pi / 2)
    assert 0 < tr.chain.delta_G <= math.pi


def test_divergence_aborts_with_snapshot():
    cfg = TrainConfig(alpha_D=math.inf, epochs=3, eval_samples=20)
    with pytest.raises(TrainingDiverged) as err:
        train_gan(cfg, _real(), make_rng(7), discriminator=stacked_encoder(1, "E1"))
    assert err.value.epoch == 1
    assert set(err.value.snapshot) >= {"theta_G", "theta_D"}
    assert "epoch 1" in str(err.value)


def test_too_few_real_samples():
    with pytest.raises(ValueError):
        train_gan(TrainConfig(), _real(5), make_rng(0))


def test_classifier_learns_something_quickly():
    ds = two_moons(40, 0.1, make_rng(8))
    tr = train_classifier(stacked_encoder(1, "E1"), ds, TrainConfig(epochs=5, alpha_D=0.05), make_rng(9))
    assert tr.epochs == 5 and len(tr.accuracy) == 5
    assert tr.loss[-1] < tr.loss[0]
    assert set(tr.class_accuracy) == {0, 1}
    assert tr.to_csv().splitlines()[0] == "epoch,loss,grad_norm,accuracy"


def test_classifier_deterministic():
    ds = two_moons(20, 0.1, make_rng(10))
    cfg = TrainConfig(epochs=2)
    a = train_classifier(stacked_encoder(1, "E2"), ds, cfg, make_rng(11))
    b = train_classifier(stacked_encoder(1, "E2"), ds, cfg, make_rng(11))
    assert a.to_csv() == b.to_csv()


def test_noise_is_uniform_unit_square():
    z = sample_noise(500, make_rng(12))
    assert z.shape == (500, 2) and 0 <= z.min() and z.max() <= 1
