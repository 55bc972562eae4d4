"""Circulation impact of sites in weighted directed flow networks.

Typical use::

    from attnflow import load_network, analyze, fit_scaling

    net = load_network("clicks.csv")
    fit = fit_scaling(analyze(net))
"""
from .balance import BalancedNetwork, TransitionMatrix, balance, transition_matrix
from .community import community_report, induce_subnetworks
from .errors import (AttnflowError, DegenerateFitError, DegenerateTopologyError,
                     EmptyNetworkError, InsufficientDataError, NonDissipativeError,
                     NumericalError, ParseError, ValidationError, WalkLimitError)
from .impact import (FundamentalMatrix, ImpactTable, SurferEstimate, analyze, compute_U,
                     impact_table, surfer_oracle)
from .layout import aggregate_communities, spring_layout, two_level_layout
from .netmodel import (FlowNetwork, LabelMap, load_labels, load_network, planted_network,
                       save_network, synth_network)
from .robustness import (ReshuffleMode, backbone, backbone_sweep, reshuffle,
                         reshuffle_battery)
from .scaling import ScalingFit, dominance_share, fit_scaling, ks_statistic, ks_threshold

__version__ = "0.1.0"
