"""Generalized Monge-Ampere products and pullbacks of pseudosmooth currents."""

from ._core import (
    chi,
    cohom_verify,
    list_oracles,
    poly_diff,
    poly_eval,
    run_oracle,
    run_scenario_file,
    run_scenario_text,
)

__all__ = [
    "chi",
    "cohom_verify",
    "list_oracles",
    "poly_diff",
    "poly_eval",
    "run_oracle",
    "run_scenario_file",
    "run_scenario_text",
]
