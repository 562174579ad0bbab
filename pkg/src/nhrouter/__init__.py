"""Non-Hermitian unidirectional routing of photonic qubits through a chiral atomic medium."""

__version__ = "0.1.0"
