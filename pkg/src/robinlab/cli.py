"""Command line interface: validate / run / summarize / oracle.

Exit codes: 0 on success (all checks pass), 1 when a check fails, 2 on
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from robinlab.errors import ConfigInvalid, MissingManifest, RobinLabError
from robinlab.runner import ExperimentConfig, run, summarize


def _load_config(path: str, seed: int | None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    if seed is not None:
        raw["seed"] = seed
    return ExperimentConfig.validate(raw)


def _cmd_validate(args) -> int:
    cfg = _load_config(args.config, args.seed)
    print(f"config OK: domain kind {cfg.raw['domain']['kind']}, checks: {', '.join(cfg.checks)}")
    return 0


def _cmd_run(args) -> int:
    cfg = _load_config(args.config, args.seed)
    out_dir = args.out or cfg.out_dir or "run_output"
    manifest = run(cfg, out_dir, jobs=args.jobs)
    print(summarize(out_dir))
    return 0 if manifest["all_passed"] else 1


def _cmd_summarize(args) -> int:
    print(summarize(args.out or "run_output"))
    return 0


def _cmd_oracle(args) -> int:
    """Recompute the derived example values from their stated oracles."""
    from robinlab.domains import Ball, Ellipsoid, boundary_samples, levi_form, nearest_boundary_point
    from robinlab.engines import BallEngine, make_engine
    from robinlab.geodesics import RobinMetricField, SyntheticAnnulusMetric, segment_g_length
    from robinlab.metric import metric_from_jet, sectional_curvature
    from robinlab.quadrature import sphere_rule
    from robinlab.scaled import ScaledDomain

    rng = np.random.default_rng(args.seed or 0)
    lines = []

    # Nearest point on the ellipsoid vs dense boundary sampling.
    ell = Ellipsoid([1.0, 4.0])
    z = np.array([0, 0.49], complex)
    frame = nearest_boundary_point(ell, z)
    samples = boundary_samples(ell, 4000, rng)
    brute = float(np.min(np.linalg.norm(samples - z, axis=1)))
    lines.append(f"ellipsoid nearest point: delta = {frame.delta:.8f}, dense-sampling oracle {brute:.8f}")

    # Levi form against a central finite difference of psi along v.
    ball = Ball(2)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    lv = levi_form(ball, np.array([0.2, 0.1j], complex), v)
    lines.append(f"ball Levi form L(z, v) = {lv:.8f}, |v|^2 oracle {float(np.sum(np.abs(v) ** 2)):.8f}")

    # Kelvin-limit oracle: Lambda(p) from shrinking-radius sampling of G - K.
    for p in (np.zeros(2, complex), np.array([0, 0.5], complex)):
        eng = make_engine(ball, p)
        vals = []
        for r in (1e-2, 1e-3, 1e-4):
            pts = p + r * sphere_rule(2, 6, 6).points
            vals.append(float(np.mean(eng.green(pts) - np.sum(np.abs(pts - p) ** 2, axis=1) ** (-1))))
        lines.append(f"ball Lambda({np.round(p, 2)}) = {eng.robin():+.8f}; shrinking-radius oracle {vals[-1]:+.8f}")

    # Family defining function against the closed composition identity.
    sd = ScaledDomain(ball, np.array([0.1, 0.4 + 0.2j], complex))
    w = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
    gap = float(np.max(np.abs(sd.f(w) - sd.f_closed(w))))
    lines.append(f"f(p,w) quadrature vs psi(p - psi(p)w)/(-psi(p)): max gap {gap:.2e}")

    # Constant holomorphic sectional curvature of the ball.
    p = np.array([0.3, 0.2 - 0.4j], complex)
    jet = make_engine(ball, p).robin_jet(order=4)
    R = sectional_curvature(metric_from_jet(jet), rng.standard_normal(2) + 1j * rng.standard_normal(2))
    lines.append(f"ball R(p, v) = {R:+.10f} (constant-curvature oracle {-1.0:+.1f})")

    # Radial g-length of the ball vs sqrt(2n-2) atanh(r0).
    field = RobinMetricField(ball)
    r0 = 0.8
    L = segment_g_length(field, np.zeros(2, complex), np.array([0, r0], complex), panels=96)
    lines.append(f"ball radial g-length to r0=0.8: {L:.8f}, oracle {math.sqrt(2.0) * math.atanh(r0):.8f}")

    # Synthetic annulus core geodesic length.
    ann = SyntheticAnnulusMetric()
    lines.append(f"annulus core circle length oracle: {ann.core_length:.8f} at radius {ann.core_radius:.6f}")

    print("\n".join(lines))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="robinlab", description="Robin-function metric laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("validate", _cmd_validate), ("run", _cmd_run), ("summarize", _cmd_summarize), ("oracle", _cmd_oracle)):
        sp = sub.add_parser(name)
        if name in ("validate", "run"):
            sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=1)
        sp.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MissingManifest as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RobinLabError as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
