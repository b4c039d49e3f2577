"""Survey-weighted topic models fitted with Hamiltonian Monte Carlo."""

__version__ = "0.1.0"
