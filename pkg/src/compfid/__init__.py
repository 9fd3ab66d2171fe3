"""Process-fidelity estimates from two complementary classical fidelities."""

from .bases import (BasisPair, OperatorBasis, OrthonormalBasis, check_mutually_unbiased,
                    computational_basis, fourier_basis, full_operator_basis, tensor_hadamard_basis)
from .channels import (NoiseSpec, QuantumChannel, chi_of, choi_of, compose, make_noise,
                       random_cptp, unitary_channel)
from .fidelity import (FidelityReport, average_fidelity, bounds, build_report, classical_fidelity,
                       process_fidelity)
from .linalg import RandomStream
from .records import MeasurementRecord

__version__ = "0.1.0"
