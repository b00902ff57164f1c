"""Noise commutants of unital quantum channels and their Wedderburn structure."""
from .channels import (
    KrausChannel,
    TrivialStructureWarning,
    apply,
    build_collective,
    build_phase_damping,
    build_two_qubit_dephasing,
    build_zz_damping,
    load_channel,
    new_channel,
    save_channel,
    superoperator,
    unitize,
)
from .commutant import algebra_basis, commutant_basis, fixed_point_basis, hermitian_spanning_set
from .errors import NoiseCommError, NonUnitalChannelError, StructureError
from .linalg import DEFAULT_TOL, OperatorSpan, ToleranceConfig
from .report import AnalysisReport, build_report
from .structure import WedderburnStructure, analyze, detect_links, minimal_family, structure_string
from .verify import (
    decode,
    encode,
    noiseless_components,
    planted_channel,
    verify_noiseless,
    verify_structure,
)

__version__ = "0.1.0"
