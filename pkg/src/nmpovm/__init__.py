"""Construction, validation and existence analysis of (N,M)-POVMs."""

from .conditions import (NecessaryReport, RadiiReport, check_optimal_m2,
                         check_optimal_m_between, check_optimal_m_ge_d,
                         check_sufficient, feasibility_screen,
                         predicted_iso_spectrum, radii)
from .constructor import (XMatrix, fixture_povm, from_expansion,
                          mum3_optimal_partition, optimal_n2_pauli,
                          psd_witnesses, simplex_vertices, simplex_x_matrix,
                          sufficient_construct, sufficient_x_bound)
from .errors import (ConstructionError, DimensionMismatchError, NumericError,
                     ParameterError, PartitionError, PovmError, RegimeError,
                     StateError, StructureError)
from .geometry import (RegionScan, boundary_radius, ratio_curve, region_scan,
                       simplex_radii)
from .herm_core import (HermitianOperator, PsdCheck, Spectrum, eig_spectrum,
                        hs_inner, is_psd, matrix_from_json, matrix_to_json)
from .operator_bases import (OperatorBasis, Partition, gell_mann_basis,
                             load_basis, load_partition, make_partition,
                             pauli_tensor_basis, preset_partition,
                             random_orthogonal, rotate_traceless, save_basis,
                             save_partition, verify_basis)
from .povm_model import (NMPovm, PovmParams, ValidationReport,
                         born_probabilities, element_index,
                         is_informationally_complete, load_povm, povm_params,
                         save_povm, validate_povm)

__version__ = "0.1.0"
