"""
smallball: Pydantic models for laws, results and reports

The models are organized by concern:
- Base: shared exact-number field types
- Distributions: discrete laws, weight vectors, atomic measures
- Concentration: Q(F, lambda) results and Monte Carlo settings
- Smoothing: the infinitely divisible law H^lambda
- GAP: symmetric progressions, regions, coverage and beta results
- Inverse: planted instances and structure reports
- Reports: the BoundReport shared by every inequality check
- Experiment: CLI run configuration
"""

# Base models
from smallball.models.base import (
    Point,
    Rational,
    Real,
    SmallballModel
)

# Distribution models
from smallball.models.dist import (
    AtomicMeasure,
    DiscreteDist,
    WeightVector
)

# Report models
from smallball.models.reports import (
    BoundReport,
    InequalityId
)

# Concentration models
from smallball.models.concentration import (
    ConcentrationResult,
    CoordinateBounds,
    MCConfig,
    Method
)

# Smoothing-law models
from smallball.models.infdiv import (
    AtomMassResult,
    SmoothingEstimate,
    SmoothingLaw
)

# GAP models
from smallball.models.gap import (
    BetaResult,
    CoverageReport,
    GAPFamily,
    Norm,
    PointSetRegion,
    ProductRegion,
    SymmetricGAP
)

# Inverse-principle models
from smallball.models.inverse import (
    InversePrincipleReport,
    PlantedInstance,
    StructureReport
)

# Experiment models
from smallball.models.experiment import (
    COMMANDS,
    ExperimentConfig
)

__all__ = [
    # Base
    'Point',
    'Rational',
    'Real',
    'SmallballModel',

    # Distributions
    'AtomicMeasure',
    'DiscreteDist',
    'WeightVector',

    # Reports
    'BoundReport',
    'InequalityId',

    # Concentration
    'ConcentrationResult',
    'CoordinateBounds',
    'MCConfig',
    'Method',

    # Smoothing
    'AtomMassResult',
    'SmoothingEstimate',
    'SmoothingLaw',

    # GAP
    'BetaResult',
    'CoverageReport',
    'GAPFamily',
    'Norm',
    'PointSetRegion',
    'ProductRegion',
    'SymmetricGAP',

    # Inverse
    'InversePrincipleReport',
    'PlantedInstance',
    'StructureReport',

    # Experiment
    'COMMANDS',
    'ExperimentConfig',
]
