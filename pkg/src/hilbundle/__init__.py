"""Galilean frame bundle on a spectral grid: group actions, connection, pseudo-forces."""
from .grid import AdmissibilityError, GridSpace, Op, Rep, StateVector, gaussian, make_grid
from .galilei import GroupWord, boost, rotate, section_word, space_translate, time_translate, transport
from .noninertial import FrameCurve, EffectiveHamiltonian, analytic_effective_hamiltonian, compare_mod_identity
from .propagator import EvolutionConfig, eliezer_leach_map, equivalence_check, evolve

__version__ = "0.1.0"
