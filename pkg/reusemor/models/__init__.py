"""
Typed records for reusemor.

Importing this package exposes every model/config/report type in one place.
"""

from reusemor.models.common import Direction, PrecondKind, PrecondMode, ReuseStrategy, utcnow  # noqa: F401
from reusemor.models.solver import GmresConfig, GmresReport, SpaiConfig, SpaiPattern  # noqa: F401
from reusemor.models.systems import BilinearSystem, QbSystem, SecondOrderSystem  # noqa: F401
from reusemor.models.mor import (  # noqa: F401
    ReuseSettings,
    AirgaConfig,
    BirkaConfig,
    BirkaState,
    QbConfig,
    ReducedQb,
    ReducedSecondOrder,
)
from reusemor.models.report import ReductionReport, ReportRow  # noqa: F401
from reusemor.models.run import RunConfig  # noqa: F401
