"""Parallel execution of (method x condition) grid cells."""

import asyncio
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor

import structlog
from pydantic import BaseModel, ConfigDict

from src.experiments.report import CellValue, Marker
from src.utils.seeding import derive_seed

logger = structlog.get_logger()

CellJob = Callable[["GridCell"], float]


class GridCell(BaseModel):
    """One independent job; its seed is fixed before dispatch."""

    model_config = ConfigDict(frozen=True)

    method: str
    condition: str
    seed: int

    @property
    def key(self) -> tuple[str, str]:
        return (self.method, self.condition)


def plan_cells(
    methods: Sequence[str],
    conditions: Sequence[str],
    master_seed: int,
    seed_keys: Mapping[str, str] | None = None,
) -> list[GridCell]:
    """Cells in row-major order, each seeded from (master, method, condition).

    seed_keys lets conditions share a seed, so they train the very same model.
    """
    keys = seed_keys or {}
    return [
        GridCell(
            method=method,
            condition=condition,
            seed=derive_seed(master_seed, method, keys.get(condition, condition)),
        )
        for method in methods
        for condition in conditions
    ]


class GridRunner:
    """Runs grid cells on a worker pool; a failing cell is marked, never fatal."""

    def __init__(self, jobs: int = 1) -> None:
        """
        Initialize the runner.

        Args:
            jobs: Worker threads (1 runs cells one after another)
        """
        self.jobs = max(1, jobs)

    async def execute(
        self, cells: Sequence[GridCell], job: CellJob
    ) -> dict[tuple[str, str], CellValue]:
        """
        Execute all cells in parallel.

        Returns:
            Accuracy per (method, condition), or the failed marker
        """
        logger.info("Starting grid", cells=len(cells), jobs=self.jobs)
        loop = asyncio.get_running_loop()

        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            tasks = [loop.run_in_executor(pool, job, cell) for cell in cells]
            # Gather results (don't fail if one cell fails)
            results = await asyncio.gather(*tasks, return_exceptions=True)

        out: dict[tuple[str, str], CellValue] = {}
        for cell, result in zip(cells, results, strict=True):
            if isinstance(result, BaseException):
                logger.warning(
                    "Grid cell failed",
                    method=cell.method,
                    condition=cell.condition,
                    error=str(result),
                )
                out[cell.key] = Marker.FAILED.value
            else:
                out[cell.key] = float(result)
        return out

    def run(self, cells: Sequence[GridCell], job: CellJob) -> dict[tuple[str, str], CellValue]:
        """Blocking wrapper around execute()."""
        return asyncio.run(self.execute(cells, job))
