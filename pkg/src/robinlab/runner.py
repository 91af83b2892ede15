"""Experiment runner: config validation, check orchestration, artifacts.

A run executes the selected checks against one domain, writing one CSV per
check (the traces), a ``summary.json`` (estimated limits, orders, pass/fail)
and a ``manifest.json`` (config hash, version, per-check status and timings,
file inventory).  Re-running the same config and seed reproduces the CSV
bytes exactly; timings live only in the manifest.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

import robinlab
from robinlab.asymptotics import (
    ApproachSequence,
    ComparabilityReport,
    comparability_check,
    curvature_limit_scan,
    det_ratio_check,
    eta_ratio_check,
    metric_asymptotics_check,
    psi_ratio_check,
    thm12_check,
    thm13_check,
)
from robinlab.domains import DefiningFunction, domain_from_config, nearest_boundary_point
from robinlab.engines import CollocationSettings, make_engine
from robinlab.errors import ConfigInvalid, MissingManifest
from robinlab.geodesics import (
    LoopDiscretization,
    RobinMetricField,
    SyntheticAnnulusMetric,
    completeness_probe,
    geodesic_shoot,
    loop_energy_and_gradient,
    segment_g_length,
    shorten_loop,
)
from robinlab.metric import metric_from_jet, psh_check
from robinlab.scaled import ScaledDomain, mean_value_check, scaled_engine, scaled_robin_jet
from robinlab.wirtinger import to_complex

_SCHEMA = {
    "domain": {"kind", "n", "center", "radius", "weights", "coeffs", "offset", "terms", "collar"},
    "engine": {"resolution", "svd_cutoff", "residual_tolerance", "value_resolution"},
    "sequence": {"z0", "path", "theta_deg", "delta0", "ratio", "count", "tangent_index"},
    "checks": None,
    "thm12_orders": None,
    "thm13_gammas": None,
    "radii": None,
    "samples": None,
    "tolerances": {
        "thm11",
        "thm12",
        "thm13_rel",
        "meanvalue",
        "ratio",
        "comparability_low",
        "comparability_high",
        "k1_slope",
        "k2_slope",
        "detratio",
        "energy_drift",
        "loop_length",
    },
    "seed": None,
    "out_dir": None,
}

_KNOWN_CHECKS = (
    "thm11",
    "thm12",
    "thm13",
    "lemma6x",
    "detratio",
    "ratio",
    "comparability",
    "meanvalue",
    "kbounds",
    "geodesic",
    "psh",
)

DEFAULT_TOLERANCES = {
    "thm11": 5e-2,
    "thm12": 5e-2,
    "thm13_rel": 1e-3,
    "meanvalue": 1e-4,
    "ratio": 5e-2,
    "comparability_low": 0.1,
    "comparability_high": 10.0,
    "k1_slope": 2.1,
    "k2_slope": 3.1,
    "detratio": 1e-6,
    "energy_drift": 1e-6,
    "loop_length": 1e-4,
}


def _check_keys(cfg: dict, schema: dict, path: str = "") -> None:
    for key, val in cfg.items():
        if key not in schema:
            raise ConfigInvalid(f"unknown config key {path + key!r}")
        allowed = schema[key]
        if isinstance(allowed, set):
            if not isinstance(val, dict):
                raise ConfigInvalid(f"config key {path + key!r} must be a mapping")
            for sub in val:
                if sub not in allowed:
                    raise ConfigInvalid(f"unknown config key {path + key + '.' + sub!r}")


@dataclass
class ExperimentConfig:
    raw: dict
    domain: DefiningFunction
    checks: list[str]
    seed: int
    out_dir: str | None

    @staticmethod
    def validate(raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigInvalid("config must be a JSON object")
        _check_keys(raw, _SCHEMA)
        if "domain" not in raw:
            raise ConfigInvalid("config needs a 'domain' section")
        try:
            domain = domain_from_config(raw["domain"])
        except (KeyError, ValueError) as exc:
            raise ConfigInvalid(f"bad domain section: {exc}") from exc
        checks = raw.get("checks", ["thm11"])
        for c in checks:
            if c not in _KNOWN_CHECKS:
                raise ConfigInvalid(f"unknown check {c!r}; known: {', '.join(_KNOWN_CHECKS)}")
        tols = raw.get("tolerances", {})
        for k in tols:
            if k not in DEFAULT_TOLERANCES:
                raise ConfigInvalid(f"unknown tolerance key {k!r}")
        return ExperimentConfig(
            raw=raw,
            domain=domain,
            checks=list(checks),
            seed=int(raw.get("seed", 0)),
            out_dir=raw.get("out_dir"),
        )

    def tolerance(self, key: str) -> float:
        return float(self.raw.get("tolerances", {}).get(key, DEFAULT_TOLERANCES[key]))

    def engine_settings(self) -> CollocationSettings | None:
        eng = self.raw.get("engine", {})
        if not eng:
            return None
        return CollocationSettings(
            resolution=float(eng.get("resolution", 1.0)),
            svd_cutoff=float(eng.get("svd_cutoff", 1e-12)),
            residual_tolerance=eng.get("residual_tolerance"),
        )

    def value_settings(self) -> CollocationSettings:
        eng = self.raw.get("engine", {})
        return CollocationSettings(resolution=float(eng.get("value_resolution", 0.55)))

    def sequence(self, path: str | None = None, theta: float | None = None) -> ApproachSequence:
        seq = self.raw.get("sequence", {})
        z0 = np.array([complex(c[0], c[1]) for c in seq.get("z0", [[0.0, 0.0], [1.0, 0.0]])])
        return ApproachSequence.build(
            self.domain,
            z0,
            path=path if path is not None else seq.get("path", "normal"),
            theta_deg=theta if theta is not None else float(seq.get("theta_deg", 0.0)),
            delta0=float(seq.get("delta0", 0.05)),
            ratio=float(seq.get("ratio", 0.5)),
            count=int(seq.get("count", 7)),
            tangent_index=int(seq.get("tangent_index", 0)),
        )

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.raw, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    summary: dict
    tables: dict[str, tuple[list[str], list[list]]]
    seconds: float = 0.0


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _rows_to_table(rows: list[dict]) -> tuple[list[str], list[list]]:
    header = list(rows[0].keys()) if rows else []
    return header, [[r[h] for h in header] for r in rows]


def _report_tables(name: str, reports) -> dict:
    tables = {}
    for rep in reports:
        tables[f"{name}_{rep.name}"] = _rows_to_table(rep.rows)
    return tables


# -- individual checks -------------------------------------------------------


def _run_thm11(cfg: ExperimentConfig) -> CheckOutcome:
    settings = cfg.engine_settings()
    tol = cfg.tolerance("thm11")
    paths = [("normal", 0.0)]
    theta = cfg.raw.get("sequence", {}).get("theta_deg")
    if theta:
        paths.append(("oblique", float(theta)))
    reports = []
    for path, th in paths:
        seq = cfg.sequence(path=path, theta=th)
        reports.append(curvature_limit_scan(cfg.domain, seq, settings=settings, tolerance=tol))
    passed = all(r.passed for r in reports)
    return CheckOutcome(
        "thm11",
        passed,
        {"reports": [r.summary() for r in reports]},
        _report_tables("thm11", reports),
    )


def _parse_orders(spec) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    return [(tuple(a), tuple(b)) for a, b in spec]


def _run_thm12(cfg: ExperimentConfig) -> CheckOutcome:
    from robinlab.asymptotics import thm12_suite

    settings = cfg.engine_settings()
    tol = cfg.tolerance("thm12")
    seq = cfg.sequence()
    n = cfg.domain.n
    default_orders = [((), ()), ((n - 1,), ()), ((n - 1,), (n - 1,)), ((n - 1, n - 1), ())]
    patterns = _parse_orders(cfg.raw.get("thm12_orders", default_orders))
    reports = thm12_suite(cfg.domain, seq, patterns, settings=settings, tolerance=tol)
    passed = all(r.passed for r in reports)
    return CheckOutcome("thm12", passed, {"reports": [r.summary() for r in reports]}, _report_tables("thm12", reports))


def _run_thm13(cfg: ExperimentConfig) -> CheckOutcome:
    seq = cfg.sequence()
    gammas = cfg.raw.get("thm13_gammas", [cfg.domain.n - 1])
    tol = cfg.tolerance("thm13_rel")
    reports = []
    for gamma in gammas:
        reports.append(
            thm13_check(
                cfg.domain,
                seq,
                int(gamma),
                settings=cfg.value_settings(),
                variation_settings=cfg.engine_settings(),
                tolerance_rel=tol,
            )
        )
    passed = all(r.passed for r in reports)
    return CheckOutcome("thm13", passed, {"reports": [r.summary() for r in reports]}, _report_tables("thm13", reports))


def _run_lemma6x(cfg: ExperimentConfig) -> CheckOutcome:
    settings = cfg.engine_settings()
    seq = cfg.sequence()
    reports = metric_asymptotics_check(cfg.domain, seq, settings=settings)
    reports.append(psi_ratio_check(cfg.domain, seq))
    passed = all(r.passed for r in reports)
    return CheckOutcome("lemma6x", passed, {"reports": [r.summary() for r in reports]}, _report_tables("lemma6x", reports))


def _run_detratio(cfg: ExperimentConfig) -> CheckOutcome:
    seq = cfg.sequence()
    rep = det_ratio_check(cfg.domain, seq, settings=cfg.engine_settings(), tolerance=cfg.tolerance("detratio"))
    return CheckOutcome("detratio", rep.passed, {"reports": [rep.summary()]}, _report_tables("detratio", [rep]))


def _run_ratio(cfg: ExperimentConfig) -> CheckOutcome:
    dom = cfg.domain
    n = dom.n
    seq = cfg.sequence()
    z0 = seq.target
    tol = cfg.tolerance("ratio")
    frame = nearest_boundary_point(dom, seq.points[-1], best_effort=True)
    z = seq.points[-1]
    nu_c = frame.unit_complex_normal
    tangent = np.conj(frame.rotation[0, :])
    rows = []
    rep_n = eta_ratio_check(dom, z, nu_c, settings=cfg.engine_settings())
    rep_t = eta_ratio_check(dom, z, tangent, settings=cfg.engine_settings())
    target_normal = 2.0 * (n - 1)
    rows.append(
        {
            "direction": "normal",
            "delta": frame.delta,
            "|eta|^2/ds^2": rep_n.ratio_direct,
            "target": target_normal,
            "route_gap": rep_n.route_gap,
        }
    )
    rows.append(
        {"direction": "tangential", "delta": frame.delta, "|eta|^2/ds^2": rep_t.ratio_direct, "target": 0.0, "route_gap": rep_t.route_gap}
    )
    # Global boundedness sample over the collar.
    rng = np.random.default_rng(cfg.seed + 11)
    max_ratio = 0.0
    sample_count = int(cfg.raw.get("samples", 200))
    from robinlab.domains import boundary_samples

    bpts = boundary_samples(dom, sample_count, rng)
    for w0 in bpts:
        d = math.exp(rng.uniform(math.log(1e-3), math.log(1e-1)))
        g = dom.gradient(w0)
        zz = w0 - d * np.conj(g) / np.linalg.norm(g)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        rep = eta_ratio_check(dom, zz, v, settings=cfg.engine_settings())
        max_ratio = max(max_ratio, rep.ratio_direct)
    passed = abs(rep_n.ratio_direct - target_normal) <= tol and rep_t.ratio_direct <= tol and math.isfinite(max_ratio)
    summary = {
        "normal_ratio": rep_n.ratio_direct,
        "tangential_ratio": rep_t.ratio_direct,
        "max_collar_ratio": max_ratio,
        "passed": passed,
    }
    return CheckOutcome("ratio", passed, summary, {"ratio_eta": _rows_to_table(rows)})


def _run_comparability(cfg: ExperimentConfig) -> CheckOutcome:
    lo, hi = cfg.tolerance("comparability_low"), cfg.tolerance("comparability_high")
    rep = comparability_check(
        cfg.domain, int(cfg.raw.get("samples", 100)), seed=cfg.seed + 5, settings=cfg.engine_settings()
    )
    passed = rep.within(lo, hi)
    return CheckOutcome(
        "comparability",
        passed,
        {"min_ratio": rep.min_ratio, "max_ratio": rep.max_ratio, "passed": passed},
        {"comparability": _rows_to_table(rep.rows)},
    )


def _run_meanvalue(cfg: ExperimentConfig) -> CheckOutcome:
    tol = cfg.tolerance("meanvalue")
    seq = cfg.sequence()
    radii = cfg.raw.get("radii", [0.2, 0.35, 0.5])
    rows = []
    worst = 0.0
    for p_index in (0, len(seq.points) // 2):
        p = seq.points[p_index]
        _, engine = scaled_engine(cfg.domain, p, settings=cfg.engine_settings())
        d0 = nearest_boundary_point(engine.domain, engine.pole, best_effort=True).delta
        for frac in radii:
            rr = frac * d0
            res = mean_value_check(engine, rr)
            worst = max(worst, abs(res))
            rows.append({"p_index": p_index, "radius": rr, "meanvalue_residual": res})
    passed = worst <= tol
    return CheckOutcome("meanvalue", passed, {"worst_residual": worst, "passed": passed}, {"meanvalue": _rows_to_table(rows)})


def _run_kbounds(cfg: ExperimentConfig) -> CheckOutcome:
    seq = cfg.sequence()
    s1_tol, s2_tol = cfg.tolerance("k1_slope"), cfg.tolerance("k2_slope")
    rows = []
    slopes1, slopes2 = [], []
    gamma = cfg.domain.n - 1
    poles = seq.points[:5] if len(seq.points) >= 5 else seq.points
    for idx, p in enumerate(poles):
        scaled = ScaledDomain(cfg.domain, p)
        rule = scaled.boundary_rule(radial_order=20, phase_order=10)
        k1 = np.abs(scaled.k1(rule.nodes, gamma))
        k2 = np.abs(scaled.k2(rule.nodes, gamma))
        r = rule.radii
        bins = np.geomspace(max(1.0, r.min() * 1.01), r.max() * 0.99, 12)
        which = np.digitize(r, bins)
        rmax, k1max, k2max = [], [], []
        for b in range(1, len(bins)):
            m = which == b
            if np.sum(m) < 3:
                continue
            rmax.append(np.exp(np.mean(np.log(r[m]))))
            k1max.append(k1[m].max())
            k2max.append(k2[m].max())
        if len(rmax) < 3:
            continue
        s1 = float(np.polyfit(np.log(rmax), np.log(k1max), 1)[0])
        s2 = float(np.polyfit(np.log(rmax), np.log(k2max), 1)[0])
        slopes1.append(s1)
        slopes2.append(s2)
        rows.append({"pole_index": idx, "delta": seq.frames[idx].delta, "k1_slope": s1, "k2_slope": s2})
    passed = bool(slopes1) and max(slopes1) <= s1_tol and max(slopes2) <= s2_tol
    return CheckOutcome(
        "kbounds",
        passed,
        {"max_k1_slope": max(slopes1) if slopes1 else math.nan, "max_k2_slope": max(slopes2) if slopes2 else math.nan, "passed": passed},
        {"kbounds": _rows_to_table(rows)},
    )


def _run_geodesic(cfg: ExperimentConfig) -> CheckOutcome:
    drift_tol = cfg.tolerance("energy_drift")
    loop_tol = cfg.tolerance("loop_length")
    rows = []
    dom = cfg.domain
    rng = np.random.default_rng(cfg.seed + 21)
    n = dom.n
    drift = 0.0
    kind = dom.exact_kind()
    if kind is not None and kind["kind"] == "ball":
        # Trajectory work needs cheap metric evaluations; exact engines only.
        field = RobinMetricField(dom)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        anchor = dom.interior_anchor()
        traj = geodesic_shoot(field, anchor, v, total_time=1.0, dt=1e-3)
        drift = traj.energy_drift
        rows.append({"quantity": "energy_drift", "value": drift, "target": drift_tol})
    # Synthetic annulus-product loop shortening toward the core circle.
    ann = SyntheticAnnulusMetric()
    m = 48
    t = 2 * np.pi * np.arange(m) / m
    pts = np.stack([1.3 * np.exp(1j * t) * np.exp(0.2 * np.sin(t)), 0.1 * np.exp(2j * t)], axis=1)
    res = shorten_loop(ann, LoopDiscretization(pts, "winding_1"), max_steps=4000, strict=False)
    rows.append({"quantity": "annulus_loop_length", "value": res.g_length, "target": ann.core_length})
    length_err = abs(res.g_length - ann.core_length)
    passed = drift < drift_tol and length_err < loop_tol
    return CheckOutcome(
        "geodesic",
        passed,
        {"energy_drift": drift, "loop_length": res.g_length, "loop_status": res.status, "passed": passed},
        {"geodesic": _rows_to_table(rows)},
    )


def _run_psh(cfg: ExperimentConfig) -> CheckOutcome:
    rng = np.random.default_rng(cfg.seed + 31)
    settings = cfg.engine_settings()
    n = cfg.domain.n
    metrics = []
    rows = []
    count = int(cfg.raw.get("samples", 20))
    anchor = cfg.domain.interior_anchor()
    for _ in range(count):
        x = rng.standard_normal(2 * n)
        x /= np.linalg.norm(x)
        z = anchor + rng.uniform(0.1, 0.9) * to_complex(x) * cfg.domain.scale * 0.5
        if float(cfg.domain.value(z)) >= -1e-6:
            continue
        jet_scaled = scaled_robin_jet(cfg.domain, z, orders=[(0, 0), (1, 0), (1, 1)], settings=settings)
        met = metric_from_jet(jet_scaled)
        met.base_point = z
        metrics.append(met)
        rows.append({"psi": float(cfg.domain.value(z)), "min_eig_scaled": met.min_eigenvalue()})
    rep = psh_check(metrics)
    return CheckOutcome(
        "psh",
        rep.positive,
        {"min_eigenvalue_scaled": rep.min_eigenvalue, "count": rep.count, "passed": rep.positive},
        {"psh": _rows_to_table(rows)},
    )


_CHECK_RUNNERS = {
    "thm11": _run_thm11,
    "thm12": _run_thm12,
    "thm13": _run_thm13,
    "lemma6x": _run_lemma6x,
    "detratio": _run_detratio,
    "ratio": _run_ratio,
    "comparability": _run_comparability,
    "meanvalue": _run_meanvalue,
    "kbounds": _run_kbounds,
    "geodesic": _run_geodesic,
    "psh": _run_psh,
}


def run(config: ExperimentConfig, out_dir: str | Path, jobs: int = 1) -> dict:
    """Execute the selected checks; write CSV traces, summary, and manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outcomes: list[CheckOutcome] = []

    def exec_one(name: str) -> CheckOutcome:
        t0 = time.perf_counter()
        try:
            outcome = _CHECK_RUNNERS[name](config)
        except Exception as exc:  # CheckFailed recorded, run continues
            outcome = CheckOutcome(name, False, {"error": f"{type(exc).__name__}: {exc}"}, {})
        outcome.seconds = time.perf_counter() - t0
        return outcome

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(exec_one, config.checks))
    else:
        outcomes = [exec_one(name) for name in config.checks]

    files = []
    for outcome in outcomes:
        for tname, (header, rows) in outcome.tables.items():
            fname = f"{tname}.csv"
            path = out / fname
            with open(path, "w") as fh:
                fh.write(",".join(header) + "\n")
                for row in rows:
                    fh.write(",".join(_fmt(v) for v in row) + "\n")
            files.append(fname)

    summary = {o.name: o.summary for o in outcomes}
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=float)
    files.append("summary.json")

    manifest = {
        "config_hash": config.hash(),
        "version": robinlab.__version__,
        "seed": config.seed,
        "checks": {o.name: {"passed": o.passed, "seconds": round(o.seconds, 3)} for o in outcomes},
        "files": sorted(files),
        "all_passed": all(o.passed for o in outcomes),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest


def summarize(run_dir: str | Path) -> str:
    """Human-readable summary of a run directory (stable formatting)."""
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise MissingManifest(f"no manifest.json in {run_dir}")
    manifest = json.loads(manifest_path.read_text())
    summary = json.loads((run_dir / "summary.json").read_text()) if (run_dir / "summary.json").exists() else {}
    lines = [f"run {manifest['config_hash']} (robinlab {manifest['version']}, seed {manifest['seed']})"]
    for name, info in manifest["checks"].items():
        status = "PASS" if info["passed"] else "FAIL"
        lines.append(f"  {name:<14s} {status}  ({info['seconds']:.1f}s)")
        body = summary.get(name, {})
        for rep in body.get("reports", []):
            lines.append(
                f"    {rep['name']:<24s} estimated limit {rep['estimated_limit']:+.6f}, "
                f"target {rep['target']:+.6f}, order {rep['order']:.2f}, "
                f"{'PASS' if rep['passed'] else 'FAIL'}"
            )
        for key in ("normal_ratio", "tangential_ratio", "max_collar_ratio", "min_ratio", "max_ratio", "worst_residual", "energy_drift", "loop_length", "min_eigenvalue_scaled", "error"):
            if key in body:
                val = body[key]
                lines.append(f"    {key} = {val:.6g}" if isinstance(val, float) else f"    {key} = {val}")
    lines.append("ALL PASS" if manifest["all_passed"] else "SOME CHECKS FAILED")
    return "\n".join(lines)
