"""Parameter sweeps over (g, chi, gamma) with one output file per grid point."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import psweep as ps
from pydantic import BaseModel, Field

from cavityring.dynamics import derive_dynamics_params, integrate_moments
from cavityring.exceptions import InvalidInputError, OutputError
from cavityring.output import format_value, render_json, render_series, render_spectrum, sha256_text, write_atomic
from cavityring.run_config import RunConfig
from cavityring.spectra import tabulate_spectrum

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class SweepPoint(BaseModel):
    g: float = Field(..., alias="g")  # Required field
    chi: float = Field(..., alias="chi")  # Required field
    gamma: float = Field(..., alias="gamma")  # Required field

    def filename(self, ext: str) -> str:
        return f"g{format_value(self.g)}_chi{format_value(self.chi)}_gamma{format_value(self.gamma)}.{ext}"


class ManifestEntry(BaseModel):
    point: SweepPoint
    file: str
    sha256: str


def grid_points(run: RunConfig) -> list[SweepPoint]:
    """Cartesian product of the grids in g-major order; a missing grid uses the system value."""
    if run.sweep is None:
        raise InvalidInputError("The profile has no sweep section.")
    system = run.system
    grids = [
        ("g", run.sweep.g if run.sweep.g is not None else [system.g]),
        ("chi", run.sweep.chi if run.sweep.chi is not None else [system.chi]),
        ("gamma", run.sweep.gamma if run.sweep.gamma is not None else [system.gamma]),
    ]
    return [SweepPoint(**pset) for pset in ps.pgrid([ps.plist(name, grid) for name, grid in grids])]


def render_point(run: RunConfig, point: SweepPoint) -> str:
    """Output text of one grid point."""
    fmt = run.output.format
    if run.sweep.command == "spectrum":
        system = run.system.model_copy(update={"g": point.g, "chi": point.chi, "gamma": point.gamma})
        rows = tabulate_spectrum(
            system.params(),
            system.n_ex,
            system.group,
            system.ring(),
            collective=system.basis == "collective",
        )
        return render_spectrum(rows, fmt)
    dynamics = run.dynamics
    params = derive_dynamics_params(point.g, point.chi, point.gamma, run.system.omega)
    series = integrate_moments(dynamics.initial_state(), params.p, params.q, dynamics.tau_end, dynamics.dt)
    return render_series(series, fmt)


def _render_task(task: tuple[RunConfig, SweepPoint]) -> str:
    return render_point(*task)


def run_sweep(run: RunConfig, out_dir: Path, jobs: int = 1) -> list[ManifestEntry]:
    """Renders every point (in parallel when jobs > 1), then writes files and the manifest."""
    points = grid_points(run)
    if jobs < 1:
        raise InvalidInputError(f"jobs must be at least 1, got {jobs}.")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"Cannot create output directory {out_dir}: {exc}") from exc
    if not os.access(out_dir, os.W_OK):
        raise OutputError(f"Output directory {out_dir} is not writable.")

    tasks = [(run, point) for point in points]
    logger.info("Sweeping %d points with %d worker(s).", len(tasks), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            texts = list(pool.map(_render_task, tasks))
    else:
        texts = [_render_task(task) for task in tasks]

    ext = run.output.format
    written: list[Path] = []
    entries: list[ManifestEntry] = []
    try:
        for point, text in zip(points, texts):
            name = point.filename(ext)
            written.append(write_atomic(out_dir / name, text))
            entries.append(ManifestEntry(point=point, file=name, sha256=sha256_text(text)))
        manifest = {
            "command": run.sweep.command,
            "format": ext,
            "entries": [entry.model_dump() for entry in entries],
        }
        write_atomic(out_dir / MANIFEST_NAME, render_json(manifest))
    except OutputError:
        for target in written:
            target.unlink(missing_ok=True)
        raise
    return entries
