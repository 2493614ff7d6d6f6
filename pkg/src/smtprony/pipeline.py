"""End-to-end recovery of point, hyperplane and radial-kernel sources.

All three procedures share one skeleton. Sensors are classified by the
conditioning of their Hankel system. The first good sensor yields the
amplitudes and fixes the node labels (ascending root order). The next good
sensors are matched root-to-node, each node is then located from its matched
distances, and the recovered model is re-synthesized at every sensor as a
final check.
"""

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import forward, geometry, hankel, prony
from .correspondence import TOL_MATCH, match_roots
from .errors import InsufficientMoments, NotEnoughGoodSensors, SMTError, VerificationFailed
from .forward import MomentVector, Probe
from .model import (HyperplaneSources, PointSources, RadialSources, SensorSet, Theorem,
                    min_sensor_count, required_good_sensors, validate_general_position)

TOL_VERIFY = 1e-5

# extracted radial moments carry quadrature and fit error of roughly 1e-7
RADIAL_TOLERANCES = {
    "eps_degenerate": 1e-6,
    "tol_res": 1e-4,
    "tol_match": 1e-4,
    "tol_verify": 1e-4,
}


@dataclass
class SensorReport:
    index: int
    sensor: np.ndarray
    status: str = "unused"  # good | degenerate | unused
    role: str = None  # primary | auxiliary
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "index": self.index,
            "sensor": self.sensor.tolist(),
            "status": self.status,
            "role": self.role,
            "diagnostics": self.diagnostics,
        }


@dataclass
class RecoveryReport:
    """Everything a recovery run produced, including partial results on failure."""

    kind: str
    dim: int
    m: int
    model: object = None
    status: str = "pending"
    message: str = ""
    sensors: list = field(default_factory=list)
    assignments: list = field(default_factory=list)
    amplitudes_primary: list = None
    verification: dict = None
    errors: dict = None
    warnings: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == "success"

    @property
    def good_sensors(self):
        return [s.index for s in self.sensors if s.status != "degenerate"]

    def to_dict(self, include_timing=True):
        from .io import model_to_dict

        out = {
            "kind": self.kind,
            "dim": self.dim,
            "m": self.m,
            "status": self.status,
            "message": self.message,
            "model": None if self.model is None else model_to_dict(self.model),
            "sensors": [s.to_dict() for s in self.sensors],
            "assignments": self.assignments,
            "amplitudes_primary": self.amplitudes_primary,
            "verification": self.verification,
            "errors": self.errors,
            "warnings": list(self.warnings),
        }
        if include_timing:
            out["timing"] = dict(self.timing)
        return out


# ---------------------------------------------------------------------------
# comparison against ground truth
# ---------------------------------------------------------------------------

def _angle(u, v):
    # the chord form stays accurate for nearly parallel vectors
    return 2.0 * math.asin(min(1.0, 0.5 * float(np.linalg.norm(u - v))))


def _pair_errors(truth, rec, i, j):
    if isinstance(truth, HyperplaneSources):
        ti, ri = truth.canonical()[i]
        tj, rj = rec.canonical()[j]
        return {"normal_angle": _angle(ti, tj), "offset": abs(ri - rj),
                "amplitude": abs(truth.amplitudes[i] - rec.amplitudes[j])}
    return {"node": float(np.linalg.norm(truth.nodes[i] - rec.nodes[j])),
            "amplitude": abs(truth.amplitudes[i] - rec.amplitudes[j])}


def compare_models(truth, recovered):
    """Per-parameter absolute errors after the best node matching.

    The matching minimizes the largest error over all m! orderings, so a report
    whose labels differ from the ground truth is not penalized.
    """
    if type(truth) is not type(recovered) and not (
            isinstance(truth, PointSources) and isinstance(recovered, PointSources)):
        raise ValueError("models are of different kinds")
    if truth.m != recovered.m:
        raise ValueError(f"truth has {truth.m} sources, recovered model has {recovered.m}")
    best = None
    for perm in itertools.permutations(range(truth.m)):
        rows = [_pair_errors(truth, recovered, i, j) for i, j in enumerate(perm)]
        worst = max(max(r.values()) for r in rows)
        if best is None or worst < best[0]:
            best = (worst, perm, rows)
    _, perm, rows = best
    keys = rows[0].keys()
    table = {k: [r[k] for r in rows] for k in keys}
    summary = {f"max_{k}": max(v) for k, v in table.items()}
    summary.update({f"mean_{k}": float(np.mean(v)) for k, v in table.items()})
    summary["max"] = max(summary[f"max_{k}"] for k in keys)
    return {"matching": list(perm), "per_source": table, **summary}


# ---------------------------------------------------------------------------
# shared skeleton
# ---------------------------------------------------------------------------

def _classify(mv, m, eps):
    if mv.probe is Probe.MONOMIAL:
        system = prony.build_hankel(prony.standardize(mv).moments, m)
    else:
        system = prony.build_hankel(mv, m)
    return prony.is_degenerate(system, eps), {"sigma_ratio": system.condition_ratio}


def _aux_roots(mv, m, eps, tol_im):
    if mv.probe is not Probe.MONOMIAL:
        c = prony.solve_coefficients(prony.build_hankel(mv, m), eps)
        return prony.find_roots(c, mv.probe, tol_im)
    st = prony.standardize(mv)
    c = prony.solve_coefficients(prony.build_hankel(st.moments, m), eps)
    r = prony.find_roots(c, None, tol_im)
    return prony.check_range(st.roots_back(r), Probe.MONOMIAL, prony.TOL_RANGE)


def _check_inputs(moments, n, m, probe):
    if m < 1:
        raise ValueError("m must be at least 1")
    if not moments:
        raise ValueError("no sensors supplied")
    for mv in moments:
        if mv.dim != n:
            raise ValueError(f"sensor {mv.sensor} is not in R^{n}")
        if mv.probe is not probe:
            raise ValueError(f"expected {probe.value} probes, got {mv.probe.value}")
        if len(mv) < 2 * m:
            raise InsufficientMoments(f"each sensor needs {2 * m} moments, got {len(mv)}")


def _warn_preconditions(report, sensors, theorem, n, m):
    need = min_sensor_count(theorem, n, m)
    if len(sensors) < need:
        report.warnings.append(
            f"{len(sensors)} sensors supplied, fewer than the {need} that guarantee recovery")
    if not validate_general_position(sensors):
        report.warnings.append("sensors are not in general position")


def _run(report, moments, theorem, n, m, to_distance, locate, build_model, opts):
    """Shared recovery skeleton. Fills ``report`` in place and returns the model."""
    eps = opts["eps_degenerate"]
    jobs = opts["jobs"]
    t0 = time.perf_counter()
    sensors = SensorSet([mv.sensor for mv in moments])
    _warn_preconditions(report, sensors, theorem, n, m)
    report.sensors = [SensorReport(i, mv.sensor) for i, mv in enumerate(moments)]

    def classify(mv):
        return _classify(mv, m, eps)

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            flags = list(pool.map(classify, moments))
    else:
        flags = [classify(mv) for mv in moments]
    good = []
    for rep, (degenerate, diag) in zip(report.sensors, flags):
        rep.diagnostics.update(diag)
        if degenerate:
            rep.status = "degenerate"
        else:
            good.append(rep.index)
    report.timing["classify"] = time.perf_counter() - t0

    need = required_good_sensors(theorem, n)
    if len(good) < need:
        raise NotEnoughGoodSensors(f"{len(good)} good sensors, {need} required")
    used = good[:need]

    # primary sensor: amplitudes and node labels
    t1 = time.perf_counter()
    first = used[0]
    sol = prony.solve_prony(moments[first], m, eps, opts["tol_im"], opts["tol_sep"], opts["tol_res"],
                            standardized=moments[first].probe is Probe.MONOMIAL)
    amplitudes = sol.amplitudes
    report.amplitudes_primary = amplitudes.tolist()
    rep = report.sensors[first]
    rep.status, rep.role = "good", "primary"
    rep.diagnostics.update(sol.diagnostics)
    rep.diagnostics["roots"] = sol.roots.tolist()
    distances = [to_distance(sol.roots)]

    for idx in used[1:]:
        roots = _aux_roots(moments[idx], m, eps, opts["tol_im"])
        asg = match_roots(amplitudes, roots, moments[idx], sensor=idx, tol_match=opts["tol_match"])
        rep = report.sensors[idx]
        rep.status, rep.role = "good", "auxiliary"
        rep.diagnostics["roots"] = roots.tolist()
        report.assignments.append(asg.to_dict())
        distances.append(to_distance(asg.distances))
    report.timing["prony"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    anchors = np.array([moments[i].sensor for i in used])
    D = np.array(distances)  # rows: sensors, columns: nodes
    params = [locate(anchors, D[:, k]) for k in range(m)]
    model = build_model(params, amplitudes)
    report.model = model
    report.timing["geometry"] = time.perf_counter() - t2
    return model


def _finish(report, truth, start):
    if truth is not None and report.model is not None:
        report.errors = compare_models(truth, report.model)
    report.timing["total"] = time.perf_counter() - start


def _guarded(report, truth, start, body):
    try:
        body()
    except SMTError as exc:
        report.status = type(exc).__name__
        report.message = str(exc)
        _finish(report, truth, start)
        exc.report = report
        raise
    report.status = "success"
    _finish(report, truth, start)
    return report


def _verify_moments(report, model, moments, synth, tol):
    worst = 0.0
    per = []
    for mv in moments:
        ref = mv.normalized_values()
        got = synth(model, mv.sensor, len(mv))
        scale = np.linalg.norm(ref)
        err = float(np.linalg.norm(got - ref) / scale) if scale > 0 else float(np.linalg.norm(got))
        per.append(err)
        worst = max(worst, err)
    report.verification = {"max_relative_misfit": worst, "per_sensor": per, "tolerance": tol}
    if worst > tol:
        raise VerificationFailed(f"recovered model misfits the data by {worst:.3e} (tolerance {tol:.0e})")


def _options(defaults, overrides):
    opts = {
        "eps_degenerate": prony.EPS_DEGENERATE,
        "tol_im": prony.TOL_IM,
        "tol_sep": prony.TOL_SEP,
        "tol_res": prony.TOL_RES,
        "tol_match": TOL_MATCH,
        "tol_verify": TOL_VERIFY,
        "tol_geo": geometry.TOL_GEO,
        "tol_unit": geometry.TOL_UNIT,
        "jobs": 1,
    }
    opts.update(defaults)
    unknown = set(overrides) - set(opts)
    if unknown:
        raise TypeError(f"unknown options: {sorted(unknown)}")
    opts.update(overrides)
    return opts


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def recover_points(moments, n, m, truth=None, **options):
    """Recover m weighted point sources in R^n from monomial-probe moments.

    Parameters
    ----------
    moments : list of MomentVector
        One per sensor, monomial probes, at least 2m values each.
    n, m : int
        Dimension and number of sources.
    truth : PointSources, optional
        Ground truth; when given the report carries parameter errors.
    **options
        Tolerance overrides (``eps_degenerate``, ``tol_im``, ``tol_sep``,
        ``tol_res``, ``tol_match``, ``tol_verify``, ``tol_geo``) and ``jobs``.

    Returns
    -------
    RecoveryReport
        On a typed failure the exception is raised with the partial report
        attached as ``exc.report``.
    """
    start = time.perf_counter()
    opts = _options({}, options)
    moments = list(moments)
    report = RecoveryReport("points", n, m)

    def locate(anchors, d):
        return geometry.trilaterate(anchors, d, opts["tol_geo"])

    def build(params, amps):
        return PointSources(params, amps)

    def body():
        _check_inputs(moments, n, m, Probe.MONOMIAL)
        model = _run(report, moments, Theorem.POINTS, n, m, lambda r: r, locate, build, opts)
        _verify_moments(report, model, moments,
                        lambda mod, y, L: forward.point_moments(mod, y, L).values, opts["tol_verify"])

    return _guarded(report, truth, start, body)


def recover_hyperplanes(moments, n, m, truth=None, **options):
    """Recover m weighted hyperplanes in R^n from Gaussian-probe moments l = 1..2m.

    Roots of the Prony polynomial are lambda_k = exp(-d_k^2); each hyperplane is
    fixed by its unsigned distances to 2n + 1 good sensors. Options as for
    ``recover_points`` plus ``tol_unit``.
    """
    start = time.perf_counter()
    opts = _options({}, options)
    moments = [mv.as_normalized() for mv in moments]
    report = RecoveryReport("hyperplanes", n, m)

    def to_distance(lam):
        return np.sqrt(np.maximum(-np.log(lam), 0.0))

    def locate(anchors, d):
        return geometry.hyperplane_from_unsigned_distances(anchors, d, opts["tol_unit"], opts["tol_geo"])

    def build(params, amps):
        return HyperplaneSources([p[0] for p in params], [p[1] for p in params], amps)

    def synth(mod, y, L):
        return forward.hyperplane_moments(mod, y, (L + 1) // 2).values[:L]

    def body():
        _check_inputs(moments, n, m, Probe.GAUSSIAN)
        model = _run(report, moments, Theorem.HYPERPLANES, n, m, to_distance, locate, build, opts)
        _verify_moments(report, model, moments, synth, opts["tol_verify"])

    return _guarded(report, truth, start, body)


def recover_radial(traces, kernel, n, m, truth=None, extraction=None, **options):
    """Recover m translated copies of a known radial kernel from spherical-mean traces.

    Each trace is turned into even moments mu_{2k} = sum_j a_j (d_j^2)^k, which
    form a monomial Prony system in the squared distances. Verification compares
    re-synthesized traces with the input. ``extraction`` passes keyword arguments
    to ``hankel.extract_even_moments``. Tolerances default to
    ``RADIAL_TOLERANCES``.
    """
    start = time.perf_counter()
    opts = _options(RADIAL_TOLERANCES, options)
    traces = list(traces)
    extraction = dict(extraction or {})
    report = RecoveryReport("radial", n, m)

    def to_distance(s):
        return np.sqrt(np.maximum(s, 0.0))

    def locate(anchors, d):
        return geometry.trilaterate(anchors, d, opts["tol_geo"])

    def build(params, amps):
        return RadialSources(params, amps, kernel)

    def extract(tr):
        return hankel.extract_even_moments(tr, kernel, n, m, **extraction)

    def body():
        if not traces:
            raise ValueError("no sensors supplied")
        for tr in traces:
            if tr.dim != n:
                raise ValueError(f"sensor {tr.sensor} is not in R^{n}")
        t0 = time.perf_counter()
        if opts["jobs"] and opts["jobs"] > 1:
            with ThreadPoolExecutor(max_workers=opts["jobs"]) as pool:
                even = list(pool.map(extract, traces))
        else:
            even = [extract(tr) for tr in traces]
        report.timing["extract"] = time.perf_counter() - t0
        moments = [MomentVector(tr.sensor, Probe.MONOMIAL, em.values, 0) for tr, em in zip(traces, even)]
        model = _run(report, moments, Theorem.RADIAL, n, m, to_distance, locate, build, opts)
        for rep, em in zip(report.sensors, even):
            rep.diagnostics["even_moments"] = em.values.tolist()
            rep.diagnostics["fit_residual"] = em.fit_residual

        t1 = time.perf_counter()
        worst, per = 0.0, []
        for tr in traces:
            again = forward.radial_trace(model, tr.sensor, tr.radii).values
            err = float(np.linalg.norm(again - tr.values) / np.linalg.norm(tr.values))
            per.append(err)
            worst = max(worst, err)
        report.timing["verify"] = time.perf_counter() - t1
        report.verification = {"max_relative_misfit": worst, "per_sensor": per,
                               "tolerance": opts["tol_verify"]}
        if worst > opts["tol_verify"]:
            raise VerificationFailed(
                f"re-synthesized traces misfit the data by {worst:.3e} (tolerance {opts['tol_verify']:.0e})")

    return _guarded(report, truth, start, body)


def simulate(model, sensors, probe_count=None, radii=None):
    """Forward data for every sensor: moments for points/hyperplanes, traces for radial."""
    if isinstance(model, RadialSources):
        return [forward.radial_trace(model, y, radii) for y in sensors]
    if isinstance(model, HyperplaneSources):
        m = model.m if probe_count is None else math.ceil(probe_count / 2)
        out = [forward.hyperplane_moments(model, y, m) for y in sensors]
        if probe_count is not None:
            out = [MomentVector(mv.sensor, mv.probe, mv.values[:probe_count], 1, True) for mv in out]
        return out
    count = 2 * model.m if probe_count is None else probe_count
    return [forward.point_moments(model, y, count) for y in sensors]


def recover(kind, data, n, m, kernel=None, truth=None, **options):
    """Dispatch on ``kind`` in {"points", "hyperplanes", "radial"}."""
    if kind == "points":
        return recover_points(data, n, m, truth, **options)
    if kind == "hyperplanes":
        return recover_hyperplanes(data, n, m, truth, **options)
    if kind == "radial":
        if kernel is None:
            raise ValueError("radial recovery needs the kernel")
        return recover_radial(data, kernel, n, m, truth, **options)
    raise ValueError(f"unknown model kind {kind!r}")
