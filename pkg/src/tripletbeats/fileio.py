"""CSV and JSON emission for traces, stationary reports and analysis results."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .hamiltonian import FieldSpec
from .montecarlo import BeatTrace
from .stationary import StationaryReport

TRACE_HEADER = ("t_ns", "ps_mean", "ps_stderr")
REPORT_HEADER = ("field_T", "state_index", "energy_GHz", "proj_prob")


def _num(x) -> str:
    return repr(float(x))


def _meta_lines(meta: dict) -> list[str]:
    lines = []
    for key, value in meta.items():
        lines.append(f"# {key}: {json.dumps(_jsonable(value), sort_keys=True)}")
    return lines


def _jsonable(value):
    if hasattr(value, "__dataclass_fields__"):
        return {k: _jsonable(v) for k, v in asdict(value).items()}
    if isinstance(value, FieldSpec):
        return list(value.b)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if hasattr(value, "value") and hasattr(value, "name"):  # enums
        return value.value
    return value


def trace_metadata(trace: BeatTrace) -> dict:
    meta = trace.meta
    out = {}
    if "params" in meta:
        out["params"] = _jsonable(meta["params"])
    if "field" in meta:
        out["field_T"] = list(meta["field"].b)
    if "mc" in meta:
        mc = meta["mc"]
        out.update({"seed": mc.master_seed, "n_traj": mc.n_traj, "tau_hop_ns": mc.tau_hop,
                    "t_max_ns": mc.t_max, "dt_ns": mc.dt})
    for k, v in meta.items():
        if k not in ("params", "field", "mc"):
            out[k] = _jsonable(v)
    return out


def trace_to_csv(trace: BeatTrace) -> str:
    buf = io.StringIO()
    for line in _meta_lines(trace_metadata(trace)):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for t, m, e in zip(trace.t, trace.ps_mean, trace.ps_stderr):
        w.writerow((_num(t), _num(m), _num(e)))
    return buf.getvalue()


def write_trace_csv(trace: BeatTrace, path) -> Path:
    p = Path(path)
    p.write_text(trace_to_csv(trace))
    return p


def read_trace_csv(path) -> BeatTrace:
    """Inverse of ``write_trace_csv``; metadata comes back as plain JSON values."""
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(": ")
                meta[key] = json.loads(value)
                continue
            rows.append(line)
    reader = csv.reader(rows)
    header = next(reader)
    if tuple(header) != TRACE_HEADER:
        raise ValueError(f"{path}: unexpected header {header}")
    data = np.array([[float(x) for x in r] for r in reader])
    return BeatTrace(data[:, 0], data[:, 1], data[:, 2], meta)


def reports_to_csv(reports: list[StationaryReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_HEADER, lineterminator="\n")
    w.writeheader()
    for rep in reports:
        for row in rep.rows():
            w.writerow({k: (_num(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def report_to_json(rep: StationaryReport) -> dict:
    return {
        "configuration": _jsonable(rep.configuration),
        "field_T": list(rep.field.b),
        "params": _jsonable(rep.params),
        "states": [
            {"state_index": s.index, "energy_GHz": s.energy, "amplitude": s.amplitude, "proj_prob": s.probability}
            for s in rep.states
        ],
        "clusters": [
            {"energy_GHz": e, "state_indices": list(idx), "proj_prob": p} for e, idx, p in rep.cluster_probabilities
        ],
    }


def write_json(obj, path) -> Path:
    p = Path(path)
    p.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return p


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
