"""Exact maximal functions and Lorentz norms on finite metric measure spaces."""
from .combiner import CombinedSpace, combine, ordering_note
from .errors import LorentzMaxError
from .experiments import ExperimentConfig, run
from .extreal import ExtReal
from .generators import (
    SequencePlan,
    build_component,
    gen_first_type,
    gen_first_type_prime,
    gen_second_type,
    gen_second_type_prime,
    synth_second_type,
    synth_second_type_prime,
    thm1_sequences,
)
from .lorentz import AdmissibleTriple, CellFunction, distribution_profile, lorentz_norm, norm_of
from .maximal import certificate_majorant, maximal_function, prop1_decompose
from .opnorm import ConstantEstimate, TrendReport, lemma_formula, restricted_constant_exact, search_constant, witness_ratio
from .space import CellularSpace, DenseSpace, realize_dense, scale_space, split_cell, validate_space

__all__ = [
    "AdmissibleTriple",
    "CellFunction",
    "CellularSpace",
    "CombinedSpace",
    "ConstantEstimate",
    "DenseSpace",
    "ExperimentConfig",
    "ExtReal",
    "LorentzMaxError",
    "SequencePlan",
    "TrendReport",
    "build_component",
    "certificate_majorant",
    "combine",
    "distribution_profile",
    "gen_first_type",
    "gen_first_type_prime",
    "gen_second_type",
    "gen_second_type_prime",
    "lemma_formula",
    "lorentz_norm",
    "maximal_function",
    "norm_of",
    "ordering_note",
    "prop1_decompose",
    "realize_dense",
    "restricted_constant_exact",
    "run",
    "scale_space",
    "search_constant",
    "split_cell",
    "synth_second_type",
    "synth_second_type_prime",
    "thm1_sequences",
    "validate_space",
    "witness_ratio",
]
