__version__ = "1.1.0.0"
__author__ = "negotiation-utilities developers"

"""
Version legend:
a.b.c.d

a: major release
b: new functionality added
c: new feature to existing functionality
d: bug fixes
"""

from .negotiation_exceptions import *
from .parameters import *
from .core import *
from .protocol import *
from .scenarios import *
from .agents import *
from .engine import *
from .persistence import *
from .analysis import *
from .tournament import *
from .experiments import run_experiment, EXPERIMENTS
from .plots import plot_metric_heatmap, plot_acceptance_curve, plot_pairs, plot_tournament
