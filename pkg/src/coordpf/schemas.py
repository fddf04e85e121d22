"""Request/response models for the benchmark service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from .bench import (
    DEFAULT_DIMS,
    DEFAULT_RHOS,
    CellStatistics,
    ExperimentConfig,
    GridResult,
)

FilterId = Literal["pf", "cpf_exact", "cpf_dirac"]
Scenario = Literal["equicorrelated", "block"]
Resampler = Literal["multinomial", "systematic"]
DimensionOrder = Literal["identity", "random"]


class ExperimentOptions(BaseModel):
    """Fields shared by every experiment request."""

    n_pf: int = Field(default=2000, ge=1)
    budget_parity: bool = True
    steps: int = Field(default=100, ge=1)
    runs: int = Field(default=10, ge=2)
    master_seed: int = Field(default=0, ge=0)
    scenario: Scenario = "equicorrelated"
    block_size: int = Field(default=6, ge=1)
    block_rho: float = Field(default=0.5, ge=0.0, lt=1.0)
    ess_fraction: float = Field(default=0.5, gt=0.0, le=1.0)
    resampler: Resampler = "systematic"
    intra_step_resampling: bool = True
    dimension_order: DimensionOrder = "identity"


class GridRequest(ExperimentOptions):
    model_config = ConfigDict(extra="forbid")

    dims: list[int] = Field(default_factory=lambda: list(DEFAULT_DIMS))
    rhos: list[float] = Field(default_factory=lambda: list(DEFAULT_RHOS))
    filters: list[FilterId] = Field(
        default_factory=lambda: ["pf", "cpf_exact", "cpf_dirac"]
    )
    workers: int = Field(default=1, ge=1)

    def to_config(self) -> ExperimentConfig:
        data = self.model_dump(exclude={"workers"})
        return ExperimentConfig(**data)


class CellRequest(ExperimentOptions):
    model_config = ConfigDict(extra="forbid")

    dim: int = Field(ge=1)
    rho: float = Field(ge=0.0, lt=1.0)
    filter: FilterId

    def to_config(self) -> ExperimentConfig:
        data = self.model_dump(exclude={"dim", "rho", "filter"})
        return ExperimentConfig(
            dims=[self.dim], rhos=[self.rho], filters=[self.filter], **data
        )


class CellResponse(BaseModel):
    scenario: Scenario
    dim: int
    rho: float
    filter: FilterId
    n_particles: int
    steps: int
    runs: int
    rmse_mean: float
    rmse_std: float
    rmse_per_run: list[float]
    degenerate_steps: int
    likelihood_evals: int
    seed: int

    @classmethod
    def from_statistics(cls, cell: CellStatistics) -> "CellResponse":
        return cls(
            scenario=cell.scenario,
            dim=cell.dim,
            rho=cell.rho,
            filter=cell.filter_id,
            n_particles=cell.n_particles,
            steps=cell.steps,
            runs=cell.runs,
            rmse_mean=cell.rmse_mean,
            rmse_std=cell.rmse_std,
            rmse_per_run=list(cell.rmse_per_run),
            degenerate_steps=cell.degenerate_steps,
            likelihood_evals=cell.likelihood_evals,
            seed=cell.seed,
        )


class WinProbabilityRow(BaseModel):
    dim: int
    rho: float
    filter_a: FilterId
    filter_b: FilterId
    p_a_less_b: float


class GridResponse(BaseModel):
    cells: list[CellResponse]
    win_probabilities: list[WinProbabilityRow]
    artifacts: dict[str, str]

    @classmethod
    def from_result(cls, result: GridResult, artifacts: dict[str, str]) -> "GridResponse":
        return cls(
            cells=[CellResponse.from_statistics(c) for c in result.cells],
            win_probabilities=[
                WinProbabilityRow(
                    dim=w.dim,
                    rho=w.rho,
                    filter_a=w.filter_a,
                    filter_b=w.filter_b,
                    p_a_less_b=w.p_a_less_b,
                )
                for w in result.win_probabilities
            ],
            artifacts=artifacts,
        )


class HealthResponse(BaseModel):
    status: str
    version: str
