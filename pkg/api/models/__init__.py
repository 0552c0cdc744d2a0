# twistorkit models
from .config import Command, MetricConfig, NumericsConfig, OutputConfig, PerturbationConfig, ReportFormat, RunConfig
from .curves import (
    ContinuationResult, CROperatorMatrix, CRResidual, DiscretizedSphereMap, HyperkaehlerTriple, KernelReport,
    MechanismReport, MechanismRow, RegularityRow, SphereGrid, TransportMode, TransportSpec, TripleCheck,
)
from .geometry import ChartDomain, CurvatureBlocks, DomainShape, MetricChart, OrthoFrame, SelfCheckReport
from .report import CommandResult, Report
from .taming import GridShape, GridSpec, PointVerdict, RegionClass, RegionReport, TamingClass, TamingVerdict
from .twistor import FibreChart, TwistorPoint, TwistorTangentFrame
