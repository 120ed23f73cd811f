"""Two-body Ising gadgets for permutation-symmetric walk experiments."""

from .spin_model import (
    IsingXZHamiltonian,
    PauliTerm,
    QubitLayout,
    apply,
    build_dense,
    diagonal_energy,
    logical_hamming_distance,
    logical_hamming_weight,
)
from .gadget import (
    GadgetSpec,
    ManifoldEntry,
    ManifoldStructureError,
    assemble_total,
    aux_fields,
    bias_to_aux_fields,
    build_correction,
    build_gadget,
    build_transverse,
    enumerate_manifold,
    sector_bias_map,
    verify_single_flip_structure,
)
from .perturbation import (
    EffectiveHamiltonian,
    closed_form_effective,
    compare_effective,
    fluctuation_table,
    second_order_numeric,
)
from .symmetric_subspace import (
    SymmetricOperator,
    build_symmetric_walk,
    dicke_amplitudes,
    effective_to_symmetric,
    project_symmetric,
)
from .dynamics import (
    EvolutionResult,
    WalkCalibration,
    calibrate,
    calibration_for_ratio,
    evolve,
    exact_search_reference,
    run_encoded_search,
    spectral_gap,
    sweep_peak,
)
from .compiler import (
    GateOp,
    GateSchedule,
    angular_factor,
    qubo_to_ising,
    ising_to_qubo,
    trotterize,
    zz_to_condphase,
)

__version__ = "0.1.0"
