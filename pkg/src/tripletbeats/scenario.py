"""Run scenarios: parsing, validation and emission of scenario files.

Scenario files are flat ``key = value`` text (``#`` starts a comment) or a
JSON object with the same keys. Every physical quantity carries its unit in
the key name. Unknown keys are errors.

Example::

    run_kind = beats
    preset = rubrene
    B_T = 0.3
    B_dir = y
    tau_hop_ps = 150
    n_traj = 10000
    t_max_ns = 20
    dt_ns = 0.01
    seed = 1
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .hamiltonian import CrystalParams, FieldSpec, PairConfiguration, preset as crystal_preset
from .montecarlo import MonteCarloParams

RUN_KINDS = ("stationary", "beats", "field-sweep", "projection-sweep", "hopping-sweep")
DEFAULT_SEED = 20240501


class ScenarioError(ValueError):
    """Invalid scenario content; the message carries line numbers where known."""


@dataclass(frozen=True)
class Scenario:
    run_kind: str
    crystal: CrystalParams
    preset: str | None = None
    field_dir: tuple[float, float, float] | str = "y"
    B_T: float = 0.0
    config: str = "AB"
    tau_hop_ps: float = 150.0
    n_traj: int = 10_000
    t_max_ns: float = 5.0
    dt_ns: float = 0.01
    seed: int = DEFAULT_SEED
    B_list_T: tuple[float, ...] = ()
    tau_hop_list_ps: tuple[float, ...] = ()
    out_dir: str = "out"
    workers: int = 1

    @property
    def field(self) -> FieldSpec:
        if self.B_T == 0:
            return FieldSpec()
        return FieldSpec.along(self.field_dir, self.B_T)

    def field_at(self, magnitude: float) -> FieldSpec:
        return FieldSpec.along(self.field_dir, magnitude) if magnitude else FieldSpec()

    def mc(self, tau_hop_ps: float | None = None) -> MonteCarloParams:
        tau = self.tau_hop_ps if tau_hop_ps is None else tau_hop_ps
        return MonteCarloParams(tau_hop=tau / 1000.0, n_traj=self.n_traj, t_max=self.t_max_ns,
                                dt=self.dt_ns, master_seed=self.seed)

    def with_overrides(self, **kw) -> "Scenario":
        return replace(self, **kw)


def _float(v):
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("must be finite")
    return x


def _int(v):
    if isinstance(v, float) and not v.is_integer():
        raise ValueError("must be an integer")
    return int(str(v).strip()) if not isinstance(v, (int, float)) else int(v)


def _float_list(v):
    if isinstance(v, str):
        items = [p for p in v.replace(",", " ").split() if p]
    else:
        items = list(v)
    return tuple(_float(p) for p in items)


def _direction(v):
    if isinstance(v, str) and v.strip().lower() in ("x", "y", "z"):
        return v.strip().lower()
    vec = _float_list(v)
    if len(vec) != 3 or not any(vec):
        raise ValueError("must be x, y, z or a nonzero 3-vector")
    return vec


# key -> value converter; order fixes the emitted layout
KEYS = {
    "run_kind": str,
    "preset": str,
    "D_cm1": _float,
    "E_cm1": _float,
    "theta_deg": _float,
    "g": _float,
    "B_T": _float,
    "B_dir": _direction,
    "config": str,
    "tau_hop_ps": _float,
    "n_traj": _int,
    "t_max_ns": _float,
    "dt_ns": _float,
    "seed": _int,
    "B_list_T": _float_list,
    "tau_hop_list_ps": _float_list,
    "out_dir": str,
    "workers": _int,
}
CRYSTAL_KEYS = ("D_cm1", "E_cm1", "theta_deg", "g")
REQUIRED = ("run_kind",)

# common unit-less spellings caught with a hint
_UNIT_HINTS = {
    "D": "D_cm1", "E": "E_cm1", "theta": "theta_deg", "B": "B_T", "tau_hop": "tau_hop_ps",
    "t_max": "t_max_ns", "dt": "dt_ns", "field": "B_T", "tau": "tau_hop_ps",
}


def _read_pairs(text: str, source: str) -> list[tuple[str, object, int]]:
    """(key, raw value, line number) triples from flat text or JSON."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from None
        if "manifest_version" in data:
            data = data["scenario"]
        lines = text.splitlines()

        def line_of(key):
            for i, ln in enumerate(lines, 1):
                if f'"{key}"' in ln:
                    return i
            return 0

        return [(k, v, line_of(k)) for k, v in data.items()]
    pairs = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key in seen:
            raise ScenarioError(f"{source}:{lineno}: duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = lineno
        pairs.append((key, value, lineno))
    return pairs


def parse_scenario_text(text: str, source: str = "<scenario>", overrides: dict | None = None) -> Scenario:
    pairs = _read_pairs(text, source)
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    errors = []
    for key, raw, lineno in pairs:
        where = f"{source}:{lineno}" if lineno else source
        if key not in KEYS:
            hint = f"; did you mean {_UNIT_HINTS[key]!r} (units go in the key name)?" if key in _UNIT_HINTS else ""
            errors.append(f"{where}: unknown key {key!r}{hint}")
            continue
        try:
            values[key] = KEYS[key](raw)
        except (TypeError, ValueError) as exc:
            errors.append(f"{where}: bad value for {key!r}: {raw!r} ({exc})")
        lines[key] = lineno
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        if key not in KEYS:
            errors.append(f"command line: unknown key {key!r}")
            continue
        try:
            values[key] = KEYS[key](raw)
        except (TypeError, ValueError) as exc:
            errors.append(f"command line: bad value for {key!r}: {raw!r} ({exc})")
        lines[key] = 0
    if errors:
        raise ScenarioError("\n".join(errors))
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ScenarioError(
            f"{source}: missing required key(s) {', '.join(missing)}; "
            f"required: {', '.join(REQUIRED)} plus either preset or all of {', '.join(CRYSTAL_KEYS[:3])}"
        )
    return _build(values, lines, source)


def _build(values: dict, lines: dict, source: str) -> Scenario:
    def where(key):
        n = lines.get(key, 0)
        return f"{source}:{n}" if n else source

    kind = values["run_kind"]
    if kind not in RUN_KINDS:
        raise ScenarioError(f"{where('run_kind')}: run_kind must be one of {', '.join(RUN_KINDS)}, got {kind!r}")

    preset_name = values.get("preset")
    explicit = {k: values[k] for k in CRYSTAL_KEYS if k in values}
    try:
        if preset_name is not None:
            base = crystal_preset(preset_name)
        else:
            missing = [k for k in CRYSTAL_KEYS[:3] if k not in explicit]
            if missing:
                raise ScenarioError(f"{source}: no preset given and missing {', '.join(missing)}")
            base = CrystalParams(explicit["D_cm1"], explicit["E_cm1"], explicit["theta_deg"], explicit.get("g", 2.0))
        crystal = CrystalParams(
            explicit.get("D_cm1", base.D), explicit.get("E_cm1", base.E),
            explicit.get("theta_deg", base.theta), explicit.get("g", base.g),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{source}: invalid crystal parameters: {exc}") from None

    kw = {k: values[k] for k in ("B_T", "config", "tau_hop_ps", "n_traj", "t_max_ns", "dt_ns", "seed",
                                 "B_list_T", "tau_hop_list_ps", "out_dir", "workers") if k in values}
    if "B_dir" in values:
        kw["field_dir"] = values["B_dir"]
    sc = Scenario(run_kind=kind, crystal=crystal, preset=preset_name, **kw)

    checks = [
        ("tau_hop_ps", sc.tau_hop_ps > 0, "tau_hop must be positive"),
        ("n_traj", sc.n_traj >= 1, "n_traj must be at least 1"),
        ("dt_ns", sc.dt_ns > 0, "dt must be positive"),
        ("t_max_ns", sc.t_max_ns >= sc.dt_ns, "t_max must be at least dt"),
        ("B_T", sc.B_T >= 0, "B_T is a magnitude and must be nonnegative; flip B_dir instead"),
        ("seed", 0 <= sc.seed < 2**64, "seed must be a 64-bit unsigned integer"),
        ("workers", sc.workers >= 1, "workers must be at least 1"),
    ]
    for key, ok, msg in checks:
        if not ok:
            raise ScenarioError(f"{where(key)}: {msg}")
    try:
        PairConfiguration.parse(sc.config)
    except ValueError as exc:
        raise ScenarioError(f"{where('config')}: {exc}") from None
    for key in ("B_list_T", "tau_hop_list_ps"):
        seq = getattr(sc, key)
        if seq and any(b <= a for a, b in zip(seq, seq[1:])):
            raise ScenarioError(f"{where(key)}: {key} must be strictly ascending")
    if any(b < 0 for b in sc.B_list_T):
        raise ScenarioError(f"{where('B_list_T')}: field magnitudes must be nonnegative")
    if any(t <= 0 for t in sc.tau_hop_list_ps):
        raise ScenarioError(f"{where('tau_hop_list_ps')}: tau_hop must be positive")
    if kind in ("field-sweep", "projection-sweep") and not sc.B_list_T:
        raise ScenarioError(f"{source}: run_kind {kind} needs a non-empty B_list_T")
    if kind == "hopping-sweep" and not sc.tau_hop_list_ps:
        raise ScenarioError(f"{source}: run_kind hopping-sweep needs a non-empty tau_hop_list_ps")
    return sc


def parse_scenario(path, overrides: dict | None = None) -> Scenario:
    """Read and validate a scenario file."""
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"scenario file {str(p)!r} does not exist")
    return parse_scenario_text(p.read_text(), str(p), overrides)


def scenario_dict(sc: Scenario) -> dict:
    """Flat key/value form of a scenario; crystal values always spelled out."""
    d = {"run_kind": sc.run_kind}
    if sc.preset is not None:
        d["preset"] = sc.preset
    d.update({"D_cm1": sc.crystal.D, "E_cm1": sc.crystal.E, "theta_deg": sc.crystal.theta, "g": sc.crystal.g})
    d["B_T"] = sc.B_T
    d["B_dir"] = sc.field_dir if isinstance(sc.field_dir, str) else list(sc.field_dir)
    d.update({
        "config": sc.config, "tau_hop_ps": sc.tau_hop_ps, "n_traj": sc.n_traj, "t_max_ns": sc.t_max_ns,
        "dt_ns": sc.dt_ns, "seed": sc.seed, "out_dir": sc.out_dir, "workers": sc.workers,
    })
    if sc.B_list_T:
        d["B_list_T"] = list(sc.B_list_T)
    if sc.tau_hop_list_ps:
        d["tau_hop_list_ps"] = list(sc.tau_hop_list_ps)
    return d


def emit_scenario(sc: Scenario) -> str:
    """Flat-text form that ``parse_scenario_text`` reads back to an equal Scenario."""
    out = []
    for key, value in scenario_dict(sc).items():
        if isinstance(value, (list, tuple)):
            value = ", ".join(repr(float(v)) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        out.append(f"{key} = {value}")
    return "\n".join(out) + "\n"
