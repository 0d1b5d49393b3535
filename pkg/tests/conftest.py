"""Shared fixtures: probe setups for the slow protocol runs, plus a summary
hook that prints one line per acceptance criterion at the end of the run."""

import math

import numpy as np
import pytest

from qstep.bayes import (
    BayesConfig,
    ising_model,
    lz_model,
    marginal_table_for,
    qubit_model,
)
from qstep.bounds import optimal_se
from qstep.fisher import ParamPoint
from qstep.models import IsingConfig, LzConfig, QubitProbeConfig

_CRITERION_LINES = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    _CRITERION_LINES.append((number, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(_CRITERION_LINES):
        terminalreporter.write_line("CRITERION %d: %s - %s" % (n, "PASS" if ok else "FAIL", detail))


class Fig4Setup:
    """One protocol scenario: model, true point, prior widths, shared table."""

    def __init__(self, model, true_point, width1, width2, grid_points=1000, batch_size=250):
        self.model = model
        self.true_point = true_point
        self.width1 = width1
        self.width2 = width2
        self.grid_points = grid_points
        self.batch_size = batch_size
        q = model.qfim_fn(true_point)
        self.mu_tilde, self.gamma_opt, self.order = optimal_se(q)
        self.table = None

    def config(self, seed: int, total_shots: int = 10_000) -> BayesConfig:
        return BayesConfig(
            total_shots=total_shots,
            gamma=self.gamma_opt,
            seed=seed,
            true_point=self.true_point,
            prior_width_1=self.width1,
            prior_width_2=self.width2,
            order=self.order,
            grid_points=self.grid_points,
            batch_size=self.batch_size,
        )

    def shared_table(self):
        if self.table is None:
            self.table = marginal_table_for(self.model, self.config(seed=0))
        return self.table


@pytest.fixture(scope="session")
def qubit_fig4():
    model = qubit_model(QubitProbeConfig(alpha=math.pi / 4, beta=3 * math.pi / 8))
    return Fig4Setup(model, ParamPoint(math.pi, 7 * math.pi / 8), math.pi / 5, math.pi / 5)


@pytest.fixture(scope="session")
def lz_fig4():
    return Fig4Setup(lz_model(LzConfig()), ParamPoint(3.5, 1.25), 0.2, 0.2)


@pytest.fixture(scope="session")
def ising_fig4():
    return Fig4Setup(ising_model(IsingConfig(6)), ParamPoint(1.5, 0.1), 1.0, 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260819)
