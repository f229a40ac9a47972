"""
Simulation Runner
Drives one simulate run: stepping, sampling, detection and persistence
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional

from models.config import RunConfig, ThresholdModel, VelocityKind
from models.responses import BlowupVerdict, DiagnosticsRecord, RunManifest, ThresholdReport, VirialReport
from problem_details import EXIT_BLOWUP, EXIT_OK, ConfigError, NumericalError
from services import diagnostics, kinsolver, persistence, thresholds
from services.initial_data import build_grids, build_state, supersolution_of
from services.kinsolver import PhaseState

logger = logging.getLogger(__name__)

CODE_VERSION = "1.0.0"


@dataclass
class RunOutcome:
    exit_code: int
    state: PhaseState
    records: List[DiagnosticsRecord]
    verdict: BlowupVerdict
    virial: Optional[VirialReport]
    manifest: Optional[RunManifest] = None
    checkpoints: List[Path] = field(default_factory=list)


class SimulationRunner:
    """Runs one configuration from its initial data (or a checkpoint) to t_end."""

    def __init__(self, config: RunConfig, out_dir: Optional[Path] = None):
        self.config = config
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.supersolution = supersolution_of(config)

    def _check_resume(self, state: PhaseState) -> None:
        grid, vset = build_grids(self.config)
        expected = (grid.n, grid.r_max, vset.kind, vset.R, vset.n_speeds, vset.n_angles)
        actual = (state.grid.n, state.grid.r_max, state.vset.kind, state.vset.R, state.vset.n_speeds, state.vset.n_angles)
        if expected != actual:
            raise ConfigError(f"checkpoint grid {actual} does not match the configuration {expected}")

    def _threshold_report(self, state0: PhaseState, record0: DiagnosticsRecord) -> ThresholdReport:
        model = self.config.model
        kind = ThresholdModel.BALL_KINETIC if model.velocity_set == VelocityKind.BALL else ThresholdModel.SPHERE_KINETIC
        mu0 = thresholds.mu0_of(state0, record0.K, model.chi0, model.R).mu0 if kind == ThresholdModel.BALL_KINETIC else None
        return thresholds.threshold_report(kind, model.chi0, model.R, model.alpha, M=record0.mass, I0=record0.I, mu0=mu0)

    def run(self, resume: Optional[PhaseState] = None) -> RunOutcome:
        cfg = self.config
        started = datetime.now(timezone.utc)
        clock = time.perf_counter()

        if resume is not None:
            self._check_resume(resume)
            state = resume
        else:
            state = build_state(cfg)
        state0 = state
        dt = kinsolver.time_step(state, cfg)
        logger.info(f"Run '{cfg.name}': M={state.mass():.6g}, dt={dt:.4e}, t_end={cfg.time.t_end:g}")

        records = [diagnostics.record_of(state, cfg, self.supersolution)]
        checkpoints: List[Path] = []
        steps = 0
        stopped_early = False
        t_end = cfg.time.t_end
        while state.t < t_end * (1.0 - 1e-14):
            state = kinsolver.step(state, cfg, min(dt, t_end - state.t))
            steps += 1
            done = state.t >= t_end * (1.0 - 1e-14)
            if steps % cfg.output.cadence and not done:
                continue
            records.append(diagnostics.record_of(state, cfg, self.supersolution))
            if not all(math.isfinite(v) for v in (records[-1].mass, records[-1].I, records[-1].K)):
                raise NumericalError(f"non-finite diagnostics at t={state.t:.6g}", diagnostics={"t": state.t})
            every = cfg.output.checkpoint_every
            if self.out_dir is not None and every and (len(records) - 1) % every == 0:
                checkpoints.append(persistence.save_checkpoint(self.out_dir / f"checkpoint-{steps:08d}.txt", state))
            if cfg.output.stop_on_blowup and diagnostics.observed_triggers(records, cfg):
                logger.warning(f"Stopping at t={state.t:.6g}: {diagnostics.observed_triggers(records, cfg)}")
                stopped_early = True
                break

        virial = diagnostics.virial_tracker(records, cfg) if cfg.output.track_virial else None
        projected = virial.projected_vanishing_time if virial is not None else None
        verdict = diagnostics.blowup_detector(records, cfg, projected)
        exit_code = EXIT_BLOWUP if verdict.verdict == "blow-up suspected" else EXIT_OK
        logger.info(f"Run '{cfg.name}' finished: {steps} steps, t={state.t:.6g}, verdict {verdict.verdict}")

        outcome = RunOutcome(exit_code=exit_code, state=state, records=records, verdict=verdict, virial=virial, checkpoints=checkpoints)
        if self.out_dir is not None:
            thresholds_report = self._threshold_report(state0, records[0])
            csv_path = persistence.write_csv(self.out_dir / "diagnostics.csv", records, cfg.output.monitored_norms)
            if stopped_early or cfg.output.checkpoint_every:
                checkpoints.append(persistence.save_checkpoint(self.out_dir / "checkpoint-final.txt", state))
            outcome.manifest = RunManifest(
                name=cfg.name,
                config=cfg.model_dump(mode="json"),
                code_version=CODE_VERSION,
                started_at=started.isoformat(),
                wall_clock_seconds=time.perf_counter() - clock,
                exit_code=exit_code,
                steps=steps,
                final_time=state.t,
                dt=dt,
                verdict=verdict,
                virial=virial,
                thresholds=thresholds_report,
                csv_path=str(csv_path),
                checkpoints=[str(p) for p in checkpoints],
            )
            persistence.write_manifest(self.out_dir / "manifest.json", outcome.manifest)
        return outcome
