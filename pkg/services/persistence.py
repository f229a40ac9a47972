"""
Config loading, diagnostics CSV, run manifest and plain-text checkpoints
"""
from __future__ import annotations

import csv
import io
import json
import logging
import re
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from models.config import RunConfig, VelocityKind
from models.responses import DiagnosticsRecord, RunManifest, norm_key
from problem_details import ConfigError, FieldError
from services.chemfield import RadialGrid
from services.kinsolver import PhaseState
from services.velocity import build_velocity_set

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = "# kinchem-checkpoint/1"
BASE_COLUMNS = ["t", "M", "I", "dIdt", "K"]


# ── Config ────────────────────────────────────────────────────────────


def _locate(text: str, loc: Sequence) -> Optional[int]:
    """1-based line of the innermost key of a validation location."""
    lines = text.splitlines()
    for key in reversed([k for k in loc if isinstance(k, str)]):
        pattern = re.compile(rf'"{re.escape(key)}"\s*:')
        for number, line in enumerate(lines, start=1):
            if pattern.search(line):
                return number
    return None


def parse_run_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"{source}:{e.lineno}: {e.msg}",
            errors=[FieldError(field="<document>", message=e.msg, line=e.lineno)],
        ) from None
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        errors = [
            FieldError(
                field=".".join(str(k) for k in err["loc"]) or "<document>",
                message=err["msg"],
                line=_locate(text, err["loc"]),
            )
            for err in e.errors()
        ]
        first = errors[0]
        where = first.line if first.line is not None else "?"
        raise ConfigError(f"{source}:{where}: {first.field}: {first.message}", errors=errors) from None


def load_run_config(path: Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    return parse_run_config(text, str(path))


# ── Diagnostics CSV ───────────────────────────────────────────────────


def csv_columns(norm_pairs: Sequence[Tuple[float, float]]) -> List[str]:
    return BASE_COLUMNS + [f"norm_{norm_key(p, q)}" for p, q in norm_pairs] + ["excess"]


def render_csv(records: Sequence[DiagnosticsRecord], norm_pairs: Sequence[Tuple[float, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_columns(norm_pairs))
    for rec in records:
        row = [rec.t, rec.mass, rec.I, rec.dIdt, rec.K]
        row += [rec.norms[norm_key(p, q)] for p, q in norm_pairs]
        row.append(rec.excess)
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_csv(path: Path, records: Sequence[DiagnosticsRecord], norm_pairs: Sequence[Tuple[float, float]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(records, norm_pairs), encoding="utf-8")
    logger.info(f"Wrote {len(records)} diagnostic samples to {path}")
    return path


def read_csv(path: Path) -> List[dict]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def write_manifest(path: Path, manifest: RunManifest) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(by_alias=True, indent=2), encoding="utf-8")
    return path


# ── Checkpoints ───────────────────────────────────────────────────────


def emit_checkpoint(state: PhaseState) -> str:
    """Header line, JSON metadata line, then one row of %.17g values per radial cell."""
    meta = {
        "t": state.t,
        "outflow": state.outflow,
        "Nr": state.grid.n,
        "r_max": state.grid.r_max,
        "kind": state.vset.kind.value,
        "R": state.vset.R,
        "Nw": state.vset.n_speeds,
        "Nphi": state.vset.n_angles,
    }
    buf = io.StringIO()
    buf.write(CHECKPOINT_MAGIC + "\n")
    buf.write(json.dumps(meta, sort_keys=True) + "\n")
    np.savetxt(buf, state.g.reshape(state.grid.n, -1), fmt="%.17g")
    return buf.getvalue()


def parse_checkpoint(text: str) -> PhaseState:
    lines = text.splitlines()
    if len(lines) < 2 or lines[0].strip() != CHECKPOINT_MAGIC:
        raise ConfigError("not a checkpoint: missing header line", errors=[FieldError(field="<header>", message="bad magic", line=1)])
    try:
        meta = json.loads(lines[1])
        grid = RadialGrid(n=int(meta["Nr"]), r_max=float(meta["r_max"]))
        vset = build_velocity_set(VelocityKind(meta["kind"]), float(meta["R"]), int(meta["Nw"]), int(meta["Nphi"]))
    except (ValueError, KeyError) as e:
        raise ConfigError(
            f"checkpoint metadata is invalid: {e}",
            errors=[FieldError(field="<metadata>", message=str(e), line=2)],
        ) from None
    try:
        values = np.loadtxt(io.StringIO("\n".join(lines[2:])), ndmin=2)
        g = values.reshape(grid.n, vset.n_speeds, vset.n_angles)
    except ValueError as e:
        raise ConfigError(f"checkpoint body does not match its metadata: {e}") from None
    return PhaseState(t=float(meta["t"]), grid=grid, vset=vset, g=g, outflow=float(meta["outflow"]))


def save_checkpoint(path: Path, state: PhaseState) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(emit_checkpoint(state), encoding="utf-8")
    logger.info(f"Checkpoint at t={state.t:.6g} written to {path}")
    return path


def load_checkpoint(path: Path) -> PhaseState:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read checkpoint {path}: {e.strerror}") from None
    return parse_checkpoint(text)
