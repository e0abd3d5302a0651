"""Almost-Kähler geometry with exact jets: curvature, normal frames and integrability defects."""

from .charts import (
    AlmostKahlerChart,
    InvariantPlane,
    StructureError,
    TangentVector,
    lie_bracket,
    load_chart,
    metric_eval,
    validate_structure,
)
from .connections import (
    B_tensor,
    L_tensor,
    RJ_tensor,
    bisectional,
    christoffel,
    covariant_derivative,
    geometry,
    hermitian_connection,
    hermitian_curvature,
    nijenhuis,
    riemann,
    sekigawa_curvature,
)
from .diagnostics import DefectReport, classify, identity_suite, integrability_defects
from .frames import (
    FrameConstructionError,
    FrameJet,
    construct_gnh_frame,
    frame_components,
    hermitian_orthonormal_frame,
    project,
    verify_gnh_properties,
)
from .jets import DomainError, Jet, JetOrderError, extract_partial, jet_arith, jet_lift
from .zoo import ZOO, flat_kahler, kodaira_thurston, symplectic_twist_r4

__version__ = "0.1.0"
