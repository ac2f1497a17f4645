"""Constrained regression over agent networks with additively split data."""

from .central import CentralSolution, qp_oracle_node_subproblem, solve_central
from .datasplit import AgentMask, DataSummand, GlobalData, generate_data, preset_masks, split_from_masks
from .framework import CostOracle, dr_round, run
from .prox import F_lambda, L1Norm, SquaredL2, ZeroFunction, get_regularizer, project_l2_ball, prox
from .regression import (
    NodeLocal,
    build_regression_oracle,
    dr_update_regression,
    edge_prox_regression,
    node_subproblem,
)
from .simnet import Message, RunTrace, audit_ledger, simulate
from .topology import Network, build_network, is_connected, random_walk_network

__version__ = "0.1.0"
