"""JSON and CSV artifacts exchanged between pipeline stages."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import List, Optional, Type, TypeVar

import numpy as np
from pydantic import BaseModel, computed_field

from src.models import (
    EnvelopeCurve,
    PartialPeak,
    ScalarSeries,
    SegmentPlan,
    SpectralVector,
    Trajectory,
)

log = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)


class SpectralArtifact(BaseModel):
    """spectral.json"""

    source: str
    sample_rate: int
    peaks: List[PartialPeak]
    d0: float
    spectral: SpectralVector

    @computed_field  # type: ignore[prop-decorator]
    @property
    def n(self) -> int:
        return self.spectral.n

    @computed_field  # type: ignore[prop-decorator]
    @property
    def nu(self) -> List[float]:
        return self.spectral.nu

    @computed_field  # type: ignore[prop-decorator]
    @property
    def d(self) -> List[float]:
        return list(self.spectral.d)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def omega(self) -> List[float]:
        return list(self.spectral.omega)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def rho_sum(self) -> float:
        return self.spectral.rho_sum


class EnvelopeArtifact(BaseModel):
    """envelope.json"""

    source: str
    np_samples: int
    curve: EnvelopeCurve
    plan: SegmentPlan


def dumps(model: BaseModel) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(model.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def write_json(model: BaseModel, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(model), encoding="utf-8")
    log.info("📝 wrote %s", path)
    return path


def read_json(path: str | Path, cls: Type[M]) -> M:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"artifact not found: {path}")
    return cls.model_validate_json(path.read_text(encoding="utf-8"))


def write_lines(lines: List[str], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_trace(
    path: str | Path,
    series: Optional[ScalarSeries] = None,
    trajectory: Optional[Trajectory] = None,
    spectral: Optional[SpectralVector] = None,
) -> Path:
    """trace.csv: t, rho, r_0..r_n, mu, then x_0..x_n, y_0..y_n for the full path.

    The scalar path needs ``spectral`` for the r columns (r_i = d_i/d_1 * rho/rho_sum);
    the full path reads them off the trajectory and needs it only for rho.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if trajectory is not None:
        r = np.asarray(trajectory.r)
        columns = ["t"]
        blocks = [trajectory.times]
        if spectral is not None:
            columns.append("rho")
            blocks.append(spectral.rho_sum * r[:, 1])
        columns += [f"r_{i}" for i in range(r.shape[1])] + ["mu"]
        blocks += [r, trajectory.mu]
        if trajectory.x is not None and trajectory.y is not None:
            width = r.shape[1]
            columns += [f"x{i}" for i in range(width)] + [f"y{i}" for i in range(width)]
            blocks += [np.asarray(trajectory.x), np.asarray(trajectory.y)]
    elif series is not None:
        rho = np.asarray(series.rho)
        columns = ["t", "rho"]
        blocks = [series.times, rho]
        if spectral is not None:
            columns += [f"r_{i}" for i in range(spectral.n + 1)]
            blocks.append(np.outer(rho / spectral.rho_sum, spectral.ratios))
        columns.append("mu")
        blocks.append(series.mu)
    else:
        raise ValueError("write_trace needs a scalar series or a trajectory")
    table = np.column_stack(blocks)
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=",".join(columns), comments="")
    log.info("📝 wrote %s (%d rows)", path, table.shape[0])
    return path


def read_trace(path: str | Path) -> tuple[List[str], np.ndarray]:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        columns = f.readline().strip().split(",")
    return columns, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
