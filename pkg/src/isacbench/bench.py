"""Monte Carlo benchmark harness: scenarios, trials, sweeps, and export."""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np
import yaml

from .cfar import CfarConfig, detect_ca, detect_global, detect_robust, estimate_noise_power
from .channel import Target, TargetSamplingSpec, sample_targets
from .config import RadioConfig, radio_from_dict
from .csi import synthesize_csi
from .metrics import AssociationGate, CurvePoint, TrialScore, associate, score_curve
from .periodogram import WindowSpec, apply_window, compute_periodogram, make_window
from .pipeline import PROFILES, ImpairmentProfile, simulate_csi_full

WORKERS_ENV_VAR = "ISACBENCH_WORKERS"


@dataclass(frozen=True)
class DetectorSpec:
    """A named detector plus its CFAR configuration."""

    name: str  # "global" | "ca" | "cs" | "os"
    cfar: CfarConfig = field(default_factory=CfarConfig)

    def __post_init__(self):
        if self.name not in ("global", "ca", "cs", "os"):
            raise ValueError(f"unknown detector {self.name!r}")

    @classmethod
    def default(cls, name: str, pfa: float = 1e-4, guard=(2, 2), reference=(6, 6),
                num_subwindows: int = 0) -> "DetectorSpec":
        base = CfarConfig(pfa=pfa, guard=tuple(guard), reference=tuple(reference),
                          num_subwindows=num_subwindows)
        if name in ("global", "ca"):
            return cls(name, base)
        if name == "cs":
            # Censor the strongest eighth of the reference statistics.
            n_stats = num_subwindows if num_subwindows > 0 else base.num_reference_cells
            return cls(name, replace(base, censor_strongest=max(1, n_stats // 8)))
        if name == "os":
            if num_subwindows > 0:
                raise ValueError("os detector requires the exact (K = 0) path")
            return cls(name, replace(base, os_rank=(base.num_reference_cells - 1) // 2))
        raise ValueError(f"unknown detector {name!r}")


def run_detector(spec: DetectorSpec, p) -> list:
    if spec.name == "global":
        return detect_global(p, spec.cfar.pfa, estimate_noise_power(p.power))
    if spec.name == "ca":
        return detect_ca(p, spec.cfar)
    return detect_robust(p, spec.cfar)


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce one Monte Carlo campaign."""

    kind: str = "noise_limited"  # "noise_limited" | "resolution_limited"
    radio: RadioConfig = field(default_factory=RadioConfig)
    snr_grid_db: tuple = tuple(range(-40, 41, 5))
    spacing_grid: tuple = tuple(np.arange(0.0, 3.01, 0.5))
    resolution_snr_db: float = 20.0
    trials_per_point: int = 1000
    sampling: TargetSamplingSpec = field(default_factory=TargetSamplingSpec)
    profiles: tuple = (ImpairmentProfile.clean(),)
    pipeline: str = "linear"  # "linear" | "full"
    windows: tuple = ("rectangular", "chebyshev:80")
    detectors: tuple = (
        DetectorSpec.default("global"),
        DetectorSpec.default("ca"),
        DetectorSpec.default("cs"),
    )
    base_seed: int = 1234

    def __post_init__(self):
        if self.kind not in ("noise_limited", "resolution_limited"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.pipeline not in ("linear", "full"):
            raise ValueError(f"unknown pipeline {self.pipeline!r}")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        grid = self.grid
        if len(grid) == 0 or list(grid) != sorted(grid):
            raise ValueError("grid must be nonempty and ordered")

    @property
    def grid(self) -> tuple:
        if self.kind == "noise_limited":
            return tuple(self.snr_grid_db)
        return tuple(self.spacing_grid)

    @property
    def x_name(self) -> str:
        return "snr_db" if self.kind == "noise_limited" else "spacing_d"


def scenario_from_dict(d: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed YAML mapping (documented schema)."""
    d = dict(d or {})
    kw = {}
    if "kind" in d:
        kw["kind"] = d.pop("kind")
    if "radio" in d:
        kw["radio"] = radio_from_dict(d.pop("radio"))
    for key in ("snr_grid_db", "spacing_grid"):
        if key in d:
            kw[key] = tuple(d.pop(key))
    for key in ("resolution_snr_db", "trials_per_point", "pipeline", "base_seed"):
        if key in d:
            kw[key] = d.pop(key)
    if "windows" in d:
        kw["windows"] = tuple(d.pop("windows"))
    if "targets" in d:
        t = dict(d.pop("targets"))
        tkw = {}
        if "count" in t:
            c = t.pop("count")
            tkw["count"] = int(c) if isinstance(c, int) else tuple(c)
        for src, dst in (
            ("range_m", "range_bounds_m"),
            ("velocity_mps", "velocity_bounds_mps"),
            ("min_spacing", "min_spacing"),
            ("mag_range_db", "mag_range_db"),
        ):
            if src in t:
                tkw[dst] = tuple(t.pop(src))
        for key in ("magnitude_law", "rice_k", "rice_omega", "enforce_min_spacing",
                    "retry_budget"):
            if key in t:
                tkw[key] = t.pop(key)
        if t:
            raise ValueError(f"unknown target sampling keys: {sorted(t)}")
        kw["sampling"] = TargetSamplingSpec(**tkw)
    if "profiles" in d:
        profs = []
        for p in d.pop("profiles"):
            if isinstance(p, str):
                profs.append(PROFILES[p]())
            else:
                profs.append(ImpairmentProfile(**p))
        kw["profiles"] = tuple(profs)
    if "detectors" in d:
        dets = []
        for item in d.pop("detectors"):
            if isinstance(item, str):
                dets.append(DetectorSpec.default(item))
            else:
                item = dict(item)
                name = item.pop("name")
                if item:
                    for key in ("guard", "reference"):
                        if key in item:
                            item[key] = tuple(item[key])
                    if set(item) <= {"pfa", "guard", "reference", "num_subwindows"}:
                        dets.append(DetectorSpec.default(name, **item))
                    else:
                        dets.append(DetectorSpec(name, CfarConfig(**item)))
                else:
                    dets.append(DetectorSpec.default(name))
        kw["detectors"] = tuple(dets)
    if d:
        raise ValueError(f"unknown scenario keys: {sorted(d)}")
    return ScenarioConfig(**kw)


def load_scenario(path) -> ScenarioConfig:
    with open(path) as fh:
        return scenario_from_dict(yaml.safe_load(fh))


@lru_cache(maxsize=128)
def _cached_window(label: str, length: int) -> np.ndarray:
    return make_window(WindowSpec.parse(label), length)


def place_target_pair(
    rng: np.random.Generator,
    sampling: TargetSamplingSpec,
    d: float,
    range_resolution_m: float,
    velocity_resolution_mps: float,
    budget: int = 1000,
) -> list:
    """Resolution-limited placement: second target at Euclidean distance d
    (in resolution units) from a uniformly drawn first target, random
    orientation, both with |alpha| = 1 and random phase."""
    r_lo, r_hi = sampling.range_bounds_m
    v_lo, v_hi = sampling.velocity_bounds_mps
    for _ in range(budget):
        r0 = rng.uniform(r_lo, r_hi)
        v0 = rng.uniform(v_lo, v_hi)
        theta = rng.uniform(0.0, 2.0 * np.pi)
        r1 = r0 + d * range_resolution_m * np.sin(theta)
        v1 = v0 + d * velocity_resolution_mps * np.cos(theta)
        if r_lo <= r1 <= r_hi and v_lo <= v1 <= v_hi:
            phases = rng.uniform(0.0, 2.0 * np.pi, size=2)
            return [
                Target(r0, v0, np.exp(1j * phases[0])),
                Target(r1, v1, np.exp(1j * phases[1])),
            ]
    raise RuntimeError(f"could not place a target pair at spacing d={d} within budget")


def trial_rng(base_seed: int, profile_idx: int, point_idx: int, trial_idx: int):
    """Independent counter-keyed stream; parallelism never changes results."""
    return np.random.default_rng(
        np.random.SeedSequence((base_seed, profile_idx, point_idx, trial_idx))
    )


def run_trial(
    scn: ScenarioConfig,
    profile: ImpairmentProfile,
    x_value: float,
    profile_idx: int,
    point_idx: int,
    trial_idx: int,
):
    """One Monte Carlo trial; deterministic given (seed, profile, point, trial).

    Returns ({(detector, window): TrialScore}, {window: median periodogram power}).
    """
    rng = trial_rng(scn.base_seed, profile_idx, point_idx, trial_idx)
    radio = scn.radio

    if scn.kind == "noise_limited":
        snr_db = float(x_value)
        targets = sample_targets(rng, scn.sampling)
    else:
        snr_db = float(scn.resolution_snr_db)
        targets = place_target_pair(
            rng, scn.sampling, float(x_value),
            radio.range_resolution_m, radio.velocity_resolution_mps,
        )

    use_full = scn.pipeline == "full" or profile.pa_enabled or profile.quantizer_bits < 64
    if use_full:
        H = simulate_csi_full(targets, snr_db, radio, rng, profile=profile)
    else:
        H = synthesize_csi(targets, snr_db, radio, rng)

    scores = {}
    floors = {}
    for window_name in scn.windows:
        wspec = WindowSpec.parse(window_name)
        w_rows = _cached_window(window_name, radio.num_subcarriers)
        w_cols = _cached_window(window_name, radio.num_symbols)
        p = compute_periodogram(apply_window(H, w_rows, w_cols))
        floors[window_name] = float(np.median(p.power))
        gate = AssociationGate.for_window(
            wspec.kind, radio.range_resolution_m, radio.velocity_resolution_mps
        )
        for det in scn.detectors:
            dets = run_detector(det, p)
            scores[(det.name, window_name)] = associate(dets, targets, gate)
    return scores, floors


def _run_point(scn: ScenarioConfig, profile_idx: int, point_idx: int):
    profile = scn.profiles[profile_idx]
    x_value = scn.grid[point_idx]
    per_key = {}
    floor_acc = {w: [] for w in scn.windows}
    for trial_idx in range(scn.trials_per_point):
        scores, floors = run_trial(scn, profile, x_value, profile_idx, point_idx, trial_idx)
        for key, s in scores.items():
            per_key.setdefault(key, []).append(s)
        for w, f in floors.items():
            floor_acc[w].append(f)
    rows = []
    for det in scn.detectors:
        for window_name in scn.windows:
            point = score_curve(per_key[(det.name, window_name)])
            rows.append(
                {
                    "scenario": scn.kind,
                    "detector": det.name,
                    "window": window_name,
                    "profile": profile.name,
                    "x_value": float(x_value),
                    "p_md": point.p_md,
                    "p_md_ci": point.p_md_ci,
                    "fa_mean": point.fa_mean,
                    "f1": point.f1,
                    "f1_ci": point.f1_ci,
                    "trials": point.trials,
                    "seed": scn.base_seed,
                }
            )
    diag = [
        {
            "profile": profile.name,
            "x_value": float(x_value),
            "window": w,
            "noise_floor_median": float(np.median(vals)),
        }
        for w, vals in floor_acc.items()
    ]
    return rows, diag


def resolve_workers(workers=None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV_VAR, "1"))
    return max(1, int(workers))


@dataclass
class BenchResult:
    """Aggregated sweep output: one row per (grid point, detector, window,
    profile), plus per-window noise-floor diagnostics."""

    scenario: ScenarioConfig
    rows: list
    diagnostics: list


def run_scenario(scn: ScenarioConfig, workers=None) -> BenchResult:
    """Run every (profile, grid point) of the scenario's Monte Carlo sweep.

    Work units are independent and seeded by index, so the result is
    byte-identical for any worker count.
    """
    units = [
        (pi, gi) for pi in range(len(scn.profiles)) for gi in range(len(scn.grid))
    ]
    workers = resolve_workers(workers)
    if workers == 1:
        results = [_run_point(scn, pi, gi) for pi, gi in units]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_point, scn, pi, gi) for pi, gi in units]
            results = [f.result() for f in futures]
    rows, diag = [], []
    for r, d in results:
        rows.extend(r)
        diag.extend(d)
    return BenchResult(scenario=scn, rows=rows, diagnostics=diag)


def run_noise_limited(scn: ScenarioConfig, workers=None) -> BenchResult:
    if scn.kind != "noise_limited":
        raise ValueError("scenario kind must be noise_limited")
    return run_scenario(scn, workers=workers)


def run_resolution_limited(scn: ScenarioConfig, workers=None) -> BenchResult:
    if scn.kind != "resolution_limited":
        raise ValueError("scenario kind must be resolution_limited")
    return run_scenario(scn, workers=workers)


RESULT_COLUMNS = (
    "scenario", "detector", "window", "profile", "x_value",
    "p_md", "p_md_ci", "fa_mean", "f1", "f1_ci", "trials", "seed",
)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def export_results(result: BenchResult, out_dir) -> dict:
    """Write results CSV, a JSON manifest with the resolved scenario, and
    per-curve plot-data files. Returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    csv_path = out_dir / "results.csv"
    with open(csv_path, "w") as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for row in result.rows:
            fh.write(",".join(_fmt(row[c]) for c in RESULT_COLUMNS) + "\n")

    manifest_path = out_dir / "manifest.json"
    manifest = {
        "scenario": dataclasses.asdict(result.scenario),
        "x_name": result.scenario.x_name,
        "diagnostics": result.diagnostics,
        "num_rows": len(result.rows),
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")

    plot_dir = out_dir / "plotdata"
    plot_dir.mkdir(exist_ok=True)
    plot_paths = []
    for (det, window, profile), rows in group_curves(result.rows).items():
        for metric, ci in (("p_md", "p_md_ci"), ("f1", "f1_ci"), ("fa_mean", None)):
            name = f"{det}_{window}_{profile}_{metric}.csv".replace(":", "")
            path = plot_dir / name
            with open(path, "w") as fh:
                fh.write("x,y,y_lo,y_hi\n")
                for row in rows:
                    y = row[metric]
                    hw = row[ci] if ci else 0.0
                    fh.write(
                        f"{_fmt(row['x_value'])},{_fmt(y)},"
                        f"{_fmt(y - hw)},{_fmt(y + hw)}\n"
                    )
            plot_paths.append(path)
    return {"csv": csv_path, "manifest": manifest_path, "plotdata": plot_paths}


def group_curves(rows: list) -> dict:
    """Group result rows into curves keyed by (detector, window, profile),
    each sorted by x."""
    curves = {}
    for row in rows:
        curves.setdefault((row["detector"], row["window"], row["profile"]), []).append(row)
    for rows_ in curves.values():
        rows_.sort(key=lambda r: r["x_value"])
    return curves


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")
