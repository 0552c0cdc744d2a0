# twistorkit services
from .curvature_engine import curvature_engine
from .expr_parser import expr_parser
from .hyperkaehler import hyperkaehler_service
from .hyperkaehler_curves import hyperkaehler_curves
from .metric_catalog import metric_catalog
from .taming_analyzer import taming_analyzer
from .twistor_geometry import twistor_geometry
