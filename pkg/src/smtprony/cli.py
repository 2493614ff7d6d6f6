"""Command-line interface.

Verbs: ``simulate``, ``recover``, ``verify``, ``demo-paper`` and ``generate``.
All files are JSON (see ``smtprony.io``). Exit codes: 0 success, 2 usage,
3 schema or I/O problem, 4 recovery error, 5 demo mismatch.
"""

import argparse
import itertools
import math
import os
import sys

import numpy as np

from . import forward, geometry, io, pipeline, prony
from .correspondence import match_roots
from .errors import AmbiguousAssignment, MultipleCandidates, SchemaError, SMTError
from .forward import MomentVector
from .hankel import GaussianKernel
from .model import (HyperplaneSources, PointSources, RadialSources, SensorSet, Theorem,
                    min_sensor_count, validate_general_position)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SCHEMA = 3
EXIT_RECOVERY = 4
EXIT_MISMATCH = 5

SEED_ENV = "PRONY_SMT_SEED"
DEMO_TOL = 5e-3

# generator constraints
MIN_GAP = 0.3
SENSOR_MARGIN = 0.05
CONDITION_MARGIN = 1e-6
ANCHOR_RATIO = 0.05
MAX_ATTEMPTS = 100


class UsageError(Exception):
    pass


def _seed(value):
    if value is not None:
        return int(value)
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


# ---------------------------------------------------------------------------
# scenario generator
# ---------------------------------------------------------------------------

def _spread(rng, k, lo, hi, gap):
    for _ in range(1000):
        v = rng.uniform(lo, hi, size=k)
        if k < 2 or np.min(np.diff(np.sort(v))) >= gap:
            return v
    raise RuntimeError("could not place well-separated values")


def _well_separated_points(rng, k, n, lo, hi, gap):
    for _ in range(1000):
        pts = rng.uniform(lo, hi, size=(k, n))
        if k < 2 or min(np.linalg.norm(p - q) for p, q in itertools.combinations(pts, 2)) >= gap:
            return pts
    raise RuntimeError("could not place well-separated points")


def _sensor_distances(model, y):
    if isinstance(model, HyperplaneSources):
        return forward.hyperplane_distances(model, y)
    return np.linalg.norm(model.nodes - y, axis=1)


def _sensor_ok(model, y, max_distance):
    d = _sensor_distances(model, y)
    if max_distance is not None and np.max(d) > max_distance:
        return False
    if d.size < 2:
        return True
    if np.min(np.diff(np.sort(d))) < SENSOR_MARGIN:
        return False
    # keep a safety factor over the degeneracy threshold used by recovery
    if isinstance(model, HyperplaneSources):
        system = prony.build_hankel(forward.hyperplane_moments(model, y, model.m), model.m)
    else:
        nodes = d if isinstance(model, PointSources) else d**2
        mv = forward.point_moments(PointSources(nodes[:, None] * [1.0, 0.0], model.amplitudes),
                                   np.zeros(2), 2 * model.m)
        system = prony.build_hankel(prony.standardize(mv).moments, model.m)
    return system.condition_ratio >= CONDITION_MARGIN


def _anchors_ok(points, n):
    # the first n + 1 sensors anchor the geometry step
    diffs = points[1: n + 1] - points[0]
    sv = np.linalg.svd(diffs, compute_uv=False)
    return bool(sv[-1] >= ANCHOR_RATIO * sv[0])


def generate_scenario(kind, n, m, seed, kernel_width=1.0):
    """Seeded random scenario honoring the model invariants.

    Amplitudes (positive) and nodes are at least 0.3 apart. There are exactly
    ``min_sensor_count`` sensors, in general position. Each sensor also sees
    every pair of sources at distances differing by at least 0.05, and its
    Hankel singular-value ratio is at least 1e-6, so no sensor sits near a
    degenerate locus. Up to 100 attempts are made.
    """
    theorem = Theorem(kind)
    if n < 2 or m < 1:
        raise UsageError("need dim >= 2 and m >= 1")
    if theorem is Theorem.RADIAL and n not in (2, 3):
        raise UsageError("radial scenarios are supported for dim 2 and 3 only")
    rng = np.random.default_rng(seed)
    count = min_sensor_count(theorem, n, m)
    for _ in range(MAX_ATTEMPTS):
        amps = _spread(rng, m, 0.5, 1.1 + 0.6 * m, MIN_GAP)
        if theorem is Theorem.HYPERPLANES:
            normals = rng.normal(size=(m, n))
            normals /= np.linalg.norm(normals, axis=1)[:, None]
            offsets = rng.uniform(0.2, 1.5, size=m)
            model = HyperplaneSources(normals, offsets, amps)
            box, max_d = 1.5, 2.0
        else:
            nodes = _well_separated_points(rng, m, n, -1.0, 1.0, MIN_GAP)
            if theorem is Theorem.RADIAL:
                model = RadialSources(nodes, amps, GaussianKernel(kernel_width))
            else:
                model = PointSources(nodes, amps)
            box, max_d = 2.0, None
        if not model.is_valid:
            continue
        sensors = []
        tries = 0
        while len(sensors) < count and tries < 200 * count:
            tries += 1
            y = rng.uniform(-box, box, size=n)
            if not _sensor_ok(model, y, max_d):
                continue
            if sensors and min(np.linalg.norm(y - s) for s in sensors) < MIN_GAP:
                continue
            sensors.append(y)
        if len(sensors) < count:
            continue
        pts = np.array(sensors)
        if validate_general_position(pts) and _anchors_ok(pts, n):
            return model, SensorSet(pts)
    raise RuntimeError(f"no valid scenario after {MAX_ATTEMPTS} attempts")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_generate(args):
    model, sensors = generate_scenario(args.kind, args.dim, args.m, _seed(args.seed))
    io.write_json(args.out, io.scenario_to_dict(model, sensors))
    return EXIT_OK


def _add_noise(items, sigma, seed):
    if not sigma:
        return items
    rng = np.random.default_rng(seed)
    out = []
    for it in items:
        noisy = it.values + rng.normal(0.0, sigma, size=it.values.shape)
        if isinstance(it, MomentVector):
            out.append(MomentVector(it.sensor, it.probe, noisy, it.first_index, it.normalized))
        else:
            out.append(forward.SphericalMeanTrace(it.sensor, it.radii, noisy, it.covers_support))
    return out


def cmd_simulate(args):
    model, sensors = io.scenario_from_dict(io.read_json(args.scenario))
    if args.probe_count is not None and args.probe_count < 1:
        raise UsageError("--probe-count must be positive")
    radii = None
    items = []
    for y in sensors:
        if isinstance(model, RadialSources) and args.radial_grid is not None:
            radii = forward.default_radii(model, y, args.radial_grid)
        items.extend(pipeline.simulate(model, [y], args.probe_count, radii))
    items = _add_noise(items, args.noise_sigma, _seed(args.seed))
    kernel = model.kernel if isinstance(model, RadialSources) else None
    kind = io.model_to_dict(model)["kind"]
    io.write_json(args.out, io.data_to_dict(items, kind, model.m, kernel))
    return EXIT_OK


def cmd_recover(args):
    items, meta = io.data_from_dict(io.read_json(args.data))
    kind = args.kind or meta["kind"]
    n = args.dim or meta["dim"]
    m = args.m or meta["m"]
    if kind is None or m is None:
        raise UsageError("model kind and m must come from the data file or --kind/--m")
    if n != meta["dim"]:
        raise UsageError(f"--dim {n} contradicts the data dimension {meta['dim']}")
    kernel = meta["kernel"]
    if kind == "radial" and args.kernel_width is not None:
        kernel = GaussianKernel(args.kernel_width)
    truth = None
    if args.truth:
        truth, _ = io.scenario_from_dict(io.read_json(args.truth))
    try:
        report = pipeline.recover(kind, items, n, m, kernel=kernel, truth=truth, jobs=args.jobs)
    except SMTError as exc:
        report = getattr(exc, "report", None)
        if report is None:
            report = pipeline.RecoveryReport(kind, n, m, status=type(exc).__name__, message=str(exc))
        io.write_json(args.out, report.to_dict())
        print(f"recovery failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RECOVERY
    io.write_json(args.out, report.to_dict())
    return EXIT_OK


def cmd_verify(args):
    truth, _ = io.scenario_from_dict(io.read_json(args.scenario))
    doc = io.read_json(args.report)
    if not isinstance(doc, dict) or "model" not in doc:
        raise SchemaError("report has no model field")
    if doc["model"] is None:
        print(f"report carries no model (status {doc.get('status')})", file=sys.stderr)
        return EXIT_RECOVERY
    recovered = io.model_from_dict(doc["model"], truth.dim)
    try:
        table = pipeline.compare_models(truth, recovered)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    io.write_json(args.out, table)
    return EXIT_OK


# ---------------------------------------------------------------------------
# worked examples
# ---------------------------------------------------------------------------

class _Checker:
    """Collects printed comparisons against reference values."""

    def __init__(self, out, tol=DEMO_TOL):
        self.out = out if out is not None else sys.stdout
        self.tol = tol
        self.failures = []
        self.errata = []
        self.count = 0

    def say(self, text=""):
        print(text, file=self.out)

    def value(self, label, got, ref, erratum=None):
        self.count += 1
        diff = abs(got - ref)
        if diff <= self.tol:
            mark = "ok"
        elif erratum:
            mark = f"MISMATCH (reference erratum: {erratum})"
            self.errata.append(label)
        else:
            mark = "MISMATCH"
            self.failures.append(label)
        self.say(f"    {label:<28s} {got:12.6f}   reference {ref:10.4f}   {mark}")

    def flag(self, label, ok):
        self.count += 1
        if not ok:
            self.failures.append(label)
        self.say(f"    {label:<60s} {'ok' if ok else 'MISMATCH'}")


EX42_NODES = [[-1.0, 0.0], [1.0, 0.0]]
EX42_AMPS = [3.0, 2.0]
EX42_SENSORS = [[0.0, 0.0], [0.0, 2.0], [-1.0, 1.0], [1.0, 1.0], [1.0, 2.0]]
EX42_TAU = [(5, 5, 5, 5), (5, 11.18, 25, 55.901), (5, 7.472, 13, 25.36),
            (5, 8.708, 17, 35.541), (5, 12.485, 32, 75.882)]
EX42_POLY = {2: (2.234, -3.235), 3: (2.234, -3.235), 4: (5.656, -4.828)}
EX42_ROOTS = {2: (1.0, 2.235), 3: (1.0, 2.235), 4: (2.0, 2.828)}
EX42_AMPLITUDES = (2.998, 2.001)
EX42_X1 = (-0.998, 0.001)
# the printed tau_3 at y5 disagrees with the printed polynomial for y5, whose
# roots 2 and 2.828 force tau_3 = 3 * 2.828^3 + 2 * 2^3 = 83.882
EX42_ERRATA = {(4, 3): "inconsistent with the printed P_y5; exact value 83.882"}


def demo_example42(out=None):
    """Two weighted points in the plane, five sensors, monomial probes."""
    ck = _Checker(out)
    model = PointSources(EX42_NODES, EX42_AMPS)
    sensors = SensorSet(EX42_SENSORS)
    moments = [forward.point_moments(model, y, 4) for y in sensors]
    ck.say("f = 3 delta(-1, 0) + 2 delta(1, 0), n = m = 2")
    ck.say(f"sensors general position: {validate_general_position(sensors)}; "
           f"sensor count {len(sensors)} = formula {min_sensor_count('points', 2, 2)}")
    ck.say()
    ck.say("moments (tau_0, tau_1, tau_2, tau_3)")
    for i, mv in enumerate(moments):
        ck.say(f"  y{i + 1} = {tuple(sensors[i].tolist())}: ({', '.join(f'{v:.3f}' for v in mv.values)})")
        for l, (got, ref) in enumerate(zip(mv.values, EX42_TAU[i])):
            ck.value(f"y{i + 1} tau_{l}", got, ref, EX42_ERRATA.get((i, l)))
    ck.say()
    ck.say("Hankel systems U c = -(tau_2, tau_3)")
    systems = [prony.build_hankel(mv, 2) for mv in moments]
    for i, sys_ in enumerate(systems):
        U = sys_.matrix
        status = "degenerate" if prony.is_degenerate(sys_) else "good"
        ck.say(f"  y{i + 1}: [[{U[0, 0]:.3f}, {U[0, 1]:.3f}], [{U[1, 0]:.3f}, {U[1, 1]:.3f}]]  "
               f"sigma ratio {sys_.condition_ratio:.3e}  -> {status}")
        ck.flag(f"y{i + 1} classified {'degenerate' if i < 2 else 'good'}",
                prony.is_degenerate(sys_) == (i < 2))
    ck.say()
    ck.say("polynomials and roots")
    roots = {}
    for i in (2, 3, 4):
        c = prony.solve_coefficients(systems[i])
        r = prony.find_roots(c)
        roots[i] = r
        ck.say(f"  P_y{i + 1}(x) = {c[0]:.3f} {c[1]:+.3f} x + x^2, roots {r[0]:.3f}, {r[1]:.3f}")
        ck.value(f"P_y{i + 1} c_0", c[0], EX42_POLY[i][0])
        ck.value(f"P_y{i + 1} c_1", c[1], EX42_POLY[i][1])
        ck.value(f"y{i + 1} root 1", r[0], EX42_ROOTS[i][0])
        ck.value(f"y{i + 1} root 2", r[1], EX42_ROOTS[i][1])
    ck.say()
    ck.say("amplitudes from the first two equations at y3")
    a = prony.solve_amplitudes(roots[2], moments[2])
    ck.say(f"  a = ({a[0]:.3f}, {a[1]:.3f})")
    ck.value("a_1", a[0], EX42_AMPLITUDES[0])
    ck.value("a_2", a[1], EX42_AMPLITUDES[1])
    ck.say()
    ck.say("assignment at y4 and y5 (node i takes root sigma(i))")
    dist = [roots[2]]
    for i in (3, 4):
        asg = match_roots(a, roots[i], moments[i], sensor=i)
        ck.say(f"  y{i + 1}: sigma = {asg.sigma}, residual {asg.residual:.2e}, "
               f"other ordering {asg.runner_up:.2e}")
        ck.flag(f"y{i + 1}: x1 takes the larger root", asg.sigma == (1, 0))
        dist.append(asg.distances)
    ck.say()
    ck.say("trilateration")
    D = np.array(dist)
    anchors = np.array([sensors[2], sensors[3], sensors[4]])
    x1 = geometry.trilaterate(anchors, D[:, 0])
    x2 = geometry.trilaterate(anchors, D[:, 1])
    ck.say(f"  x1 = ({x1[0]:.3f}, {x1[1]:.3f}), x2 = ({x2[0]:.3f}, {x2[1]:.3f})")
    ck.value("x1 first coordinate", x1[0], EX42_X1[0])
    ck.value("x1 second coordinate", x1[1], EX42_X1[1])
    ck.flag("x2 within 1e-2 of (1, 0)", bool(np.linalg.norm(x2 - [1.0, 0.0]) <= 1e-2))
    ck.say()
    report = pipeline.recover_points(moments, 2, 2, truth=model)
    ck.say(f"full pipeline: status {report.status}, max error {report.errors['max']:.2e}")
    ck.flag("pipeline reproduces the sources", report.errors["max"] <= 1e-9)
    return _summary(ck)


def _summary(ck):
    ck.say()
    ck.say(f"{ck.count} checks, {len(ck.failures)} mismatches, {len(ck.errata)} reference errata")
    for label in ck.errata:
        ck.say(f"  erratum: {label}")
    for label in ck.failures:
        ck.say(f"  MISMATCH: {label}")
    return EXIT_OK if not ck.failures else EXIT_MISMATCH


def demo_counterexample_points(out=None):
    """Equal amplitudes: two different point pairs with identical data at three sensors."""
    ck = _Checker(out, tol=1e-12)
    f1, f2, sensors = forward.counterexample_points()
    ck.say("f1 = delta(0, 1) + delta(2, -1), f2 = delta(0, -1) + delta(2, 1)")
    for i, y in enumerate(sensors):
        m1 = forward.point_moments(f1, y, 8).values
        m2 = forward.point_moments(f2, y, 8).values
        diff = float(np.max(np.abs(m1 - m2)))
        ck.say(f"  y{i + 1} = {tuple(y.tolist())}: max |tau(f1) - tau(f2)| over l < 8 = {diff:.1e}")
        ck.flag(f"y{i + 1}: moment vectors identical", diff <= 1e-12)
    moments = [forward.point_moments(f1, y, 4) for y in sensors]
    try:
        pipeline.recover_points(moments, 2, 2)
        ck.say("  recovery returned a model")
        ck.flag("recovery refuses with AmbiguousAssignment", False)
    except AmbiguousAssignment as exc:
        ck.say(f"  recovery stopped: AmbiguousAssignment ({exc})")
        ck.flag("recovery refuses with AmbiguousAssignment", True)
    return _summary(ck)


def demo_counterexample_lines(out=None):
    """Equal amplitudes: two different line pairs with identical data at five sensors."""
    ck = _Checker(out, tol=1e-12)
    f1, f2, sensors = forward.counterexample_hyperplanes()
    names = ["l1", "l2", "k1", "k2"]
    planes = [(f1.normals[0], f1.offsets[0]), (f1.normals[1], f1.offsets[1]),
              (f2.normals[0], f2.offsets[0]), (f2.normals[1], f2.offsets[1])]
    ck.say("l1: x - 2y = 0, l2: 2x + y = 0 against k1: x + 2y = 0, k2: 2x - y = 0")
    ck.say("distance table (units of 1/sqrt(5))")
    ck.say("        " + "".join(f"{nm:>8s}" for nm in names))
    s5 = math.sqrt(5.0)
    for i, y in enumerate(sensors):
        d = [geometry.unsigned_distance(y, t, r) for t, r in planes]
        ck.say(f"  y{i + 1}  " + "".join(f"{v * s5:8.3f}" for v in d))
        pairs = []
        for a_, b_ in ((0, 2), (0, 3), (1, 2), (1, 3)):
            if abs(d[a_] - d[b_]) <= 1e-12:
                pairs.append(f"d(y{i + 1},{names[a_]})=d(y{i + 1},{names[b_]})")
        ck.say("       " + ", ".join(pairs))
        ck.flag(f"y{i + 1}: distance multisets agree",
                np.allclose(sorted(d[:2]), sorted(d[2:]), rtol=0, atol=1e-12))
        m1 = forward.hyperplane_moments(f1, y, 4).values
        m2 = forward.hyperplane_moments(f2, y, 4).values
        ck.flag(f"y{i + 1}: moment vectors identical", float(np.max(np.abs(m1 - m2))) <= 1e-12)
    ck.say()
    anchors = sensors.points[:3]
    d = [geometry.unsigned_distance(y, *planes[0]) for y in anchors]
    try:
        geometry.hyperplane_from_unsigned_distances(anchors, d)
        ck.flag("three anchors leave two candidate lines", False)
    except MultipleCandidates as exc:
        ck.say(f"  distances of l1 from y1, y2, y3 fit {len(exc.candidates)} lines:")
        for theta, rho in exc.candidates:
            ck.say(f"    theta = ({theta[0]:+.4f}, {theta[1]:+.4f}), rho = {rho:.1f}")
        ck.flag("three anchors leave two candidate lines", len(exc.candidates) == 2)
    return _summary(ck)


DEMOS = {
    "example42": demo_example42,
    "counterexample-points": demo_counterexample_points,
    "counterexample-lines": demo_counterexample_lines,
}


def cmd_demo_paper(args):
    return DEMOS[args.which]()


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="smtprony", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded random scenario")
    g.add_argument("--kind", required=True, choices=[t.value for t in Theorem])
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    g.add_argument("--out", default="-")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("simulate", help="synthesize moments or traces for a scenario")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", default="-")
    s.add_argument("--probe-count", type=int, default=None, help="moments per sensor (default 2m)")
    s.add_argument("--radial-grid", type=int, default=None, help="trace samples per sensor")
    s.add_argument("--noise-sigma", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=None, help=f"noise seed; default ${SEED_ENV} or 0")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("recover", help="recover a model from moments or traces")
    r.add_argument("--data", required=True)
    r.add_argument("--out", default="-")
    r.add_argument("--kind", choices=[t.value for t in Theorem], default=None)
    r.add_argument("--dim", type=int, default=None)
    r.add_argument("--m", type=int, default=None)
    r.add_argument("--kernel-width", type=float, default=None,
                   help="Gaussian kernel width for radial data without a kernel entry")
    r.add_argument("--truth", default=None, help="scenario file; adds parameter errors to the report")
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=cmd_recover)

    v = sub.add_parser("verify", help="compare a recovery report with its scenario")
    v.add_argument("--scenario", required=True)
    v.add_argument("--report", required=True)
    v.add_argument("--out", default="-")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("demo-paper", help="reproduce the worked examples")
    d.add_argument("which", choices=sorted(DEMOS))
    d.set_defaults(func=cmd_demo_paper)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except SMTError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RECOVERY


if __name__ == "__main__":
    sys.exit(main())
