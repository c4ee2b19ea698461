"""Two-qubit hybrid quantum-classical GAN on an exact statevector simulator."""
from .sim import (GateKind, StateVector, amplitude_encode, apply_gate, basis_encode, dense_angle_encode,
                  expectation_pauli_z, gate_matrix, zero_state)
from .circuits import (Circuit, Constant, DataFeature, GateSpec, Trainable, bind_and_run, build_ansatz_a,
                       build_encoder_e1, build_encoder_e2, build_generator, build_network, compose,
                       count_gates, count_trainable, stacked_encoder)
from .gradients import (expectation, feature_derivative, finite_difference, param_shift_derivative,
                        param_shift_gradient)
from .gan import (ChainParams, DiscriminatorModel, GeneratorModel, TrainConfig, TrainTrace, disc_loss,
                  disc_loss_gradient, discriminator_output, gen_loss, gen_loss_gradient, generator_output,
                  sgd_update, train_classifier, train_gan)

__version__ = "0.1.0"
