"""
Profile Tables Node

Tabulates the one-dimensional hydrodynamic objects of the run: the
streamline map and strength, the downstream height map for three pressure
differences, the downstream velocity and the asymptotic height as λ varies.
"""

import logging
from typing import List

import numpy as np
from pydantic import Field

from jetflow.core.nodes.base import Node
from jetflow.core.task import TaskContext
from jetflow.schemas.reports import CheckResult
from jetflow.schemas.run_event import RunEvent
from jetflow.services.diagnostics import profile_identity_checks
from jetflow.services.jetfit import build_geometry, build_profile
from jetflow.services.profiles import (
    DownstreamState,
    VorticityModel,
    asymptotic_height,
    chi,
    pressure_difference,
)
from jetflow.services.report_writer import write_table
from jetflow.workflows.run_nodes.setup import strength_checks_for

logger = logging.getLogger(__name__)

SAMPLES = 129
LAMBDA_FACTORS = (1.0, 1.5, 3.0)


class ProfileTablesNode(Node):
    class OutputType(Node.OutputType):
        Q: float
        lambda0: float
        tables: dict = Field(default_factory=dict)
        checks: List[CheckResult] = Field(default_factory=list)

    async def process(self, task_context: TaskContext) -> TaskContext:
        event: RunEvent = task_context.event
        config = event.config
        out = event.output_dir
        geometry = build_geometry(config.geometry)
        profile = build_profile(config.profile, geometry.H)
        model = VorticityModel.from_profile(profile, table_nodes=config.profile.table_nodes)
        Q, H, lam0 = model.Q, profile.H, profile.lambda0

        t = np.linspace(0.0, Q, SAMPLES)
        t_ext = np.linspace(-1.0, Q + 1.0, SAMPLES)
        tables = {
            "kappa": write_table(
                out / "kappa.dat", ["t", "kappa", "f0"], np.column_stack([t, model.kappa(t), model.f0(t)])
            ).name,
            "strength": write_table(
                out / "strength.dat",
                ["t", "f0_ext", "F0"],
                np.column_stack([t_ext, model.f0_ext(t_ext), model.F0(t_ext)]),
            ).name,
        }

        lams = [factor * lam0 for factor in LAMBDA_FACTORS]
        if config.lam is not None and config.lam not in lams:
            lams.append(config.lam)
        s = np.linspace(0.0, H, SAMPLES)
        chi_columns = [chi(profile, s, pressure_difference(lam, profile)) for lam in lams]
        tables["chi"] = write_table(
            out / "chi.dat", ["s", *(f"chi_lambda={lam:.6g}" for lam in lams)], np.column_stack([s, *chi_columns])
        ).name

        u1_rows = []
        for lam in lams:
            state = DownstreamState.build(lam, profile, config.p_atm)
            y = np.linspace(0.0, state.h, SAMPLES)
            u1_rows.append(np.column_stack([np.full(y.shape, lam), y, state.u1(y), state.Psi_lambda(y)]))
        tables["u1"] = write_table(out / "u1.dat", ["lambda", "y", "u1", "Psi_lambda"], np.vstack(u1_rows)).name

        sweep = np.linspace(lam0, max(lams), SAMPLES)
        heights = [asymptotic_height(lam, profile) for lam in sweep]
        p_diffs = [pressure_difference(lam, profile) for lam in sweep]
        tables["h_lambda"] = write_table(
            out / "h_lambda.dat", ["lambda", "p_diff", "h_lambda"], np.column_stack([sweep, p_diffs, heights])
        ).name

        checks = strength_checks_for(model) + profile_identity_checks(profile)
        logger.info(f"Profile tables written for Q={Q:.6g}, λ₀={lam0:.6g}: {', '.join(tables.values())}")
        self.save_output(self.OutputType(Q=Q, lambda0=lam0, tables=tables, checks=checks))
        return task_context
