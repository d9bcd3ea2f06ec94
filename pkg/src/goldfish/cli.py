"""Command-line batch runner: ``goldfish {verify,simulate,separate,superint}``.

Exit status is 0 when every check passes, 1 when any check fails and 2 for
usage or configuration errors.
"""

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import sys
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import flow, hamfam, poisson, sepvar
from .errors import ContourSingularity, GoldfishError, StepSizeUnderflow, TrajectoryCollision
from .hamfam import PhaseState
from .polycore import Polynomial, match_roots

log = logging.getLogger("goldfish")

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_TOLERANCES = {
    "family_inverse": 1e-10,
    "family_derivative": 1e-6,
    "involution": 1e-8,
    "route": 1e-6,
    "observable_route": 1e-10,
    "coefficient_bracket": 1e-8,
    "r_bracket": 1e-8,
    "r_symmetry": 1e-10,
    "closure": 1e-8,
    "commutator": 1e-12,
    "translation": 1e-8,
    "lambda_commutation": 1e-8,
    "drift": 1e-8,
    "exact": 1e-6,
    "moment": 1e-8,
    "isochrony_observables": 1e-7,
    "isochrony_positions": 1e-6,
    "beta_drift": 1e-6,
    "linear_beta": 1e-10,
    "hamilton_jacobi": 1e-6,
    "superint_drift": 1e-6,
}


class ConfigError(ValueError):
    pass


def parse_complex(x, where="value"):
    """Accept a number, an [re, im] pair or a Python complex literal string."""
    if isinstance(x, bool):
        raise ConfigError(f"{where}: expected a complex number, got {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        try:
            return complex(x.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"{where}: cannot read {x!r} as a complex number")


def _complex_list(xs, where):
    if not isinstance(xs, (list, tuple)):
        raise ConfigError(f"{where}: expected a list")
    return [parse_complex(x, f"{where}[{i}]") for i, x in enumerate(xs)]


@dataclass
class FamilyConfig:
    name: str = "goldfish"
    phi_offset: float = 0.0


@dataclass
class FlowConfig:
    kind: str = "single_h"
    k: int = 1
    alpha: complex = 0.0
    lam: Optional[list] = None
    mu: complex = 0.0
    t_span: tuple = (0.0, 1.0)
    sample_count: int = 101


@dataclass
class InitialConfig:
    p: Optional[list] = None
    q: Optional[list] = None
    P0: Optional[list] = None


@dataclass
class OutputConfig:
    path: Optional[str] = None
    format: str = "json"


@dataclass
class ExperimentConfig:
    family: FamilyConfig = field(default_factory=FamilyConfig)
    N: int = 3
    flow: FlowConfig = field(default_factory=FlowConfig)
    seed: int = 0
    samples: int = 10
    tolerances: dict = field(default_factory=dict)
    output: OutputConfig = field(default_factory=OutputConfig)
    initial: Optional[InitialConfig] = None

    def tol(self, name):
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])


def _section(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    return data


def _int(x, where, minimum=None):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{where}: expected an integer")
    if minimum is not None and x < minimum:
        raise ConfigError(f"{where}: must be at least {minimum}")
    return x


def load_config(data):
    """Validate a parsed JSON document into an :class:`ExperimentConfig`."""
    data = _section(ExperimentConfig, data, "config")
    cfg = ExperimentConfig()
    if "family" in data:
        fam = _section(FamilyConfig, data["family"], "family")
        cfg.family = FamilyConfig(str(fam.get("name", "goldfish")),
                                  float(fam.get("phi_offset", 0.0)))
    if "N" in data:
        cfg.N = _int(data["N"], "N", 1)
    if "seed" in data:
        cfg.seed = _int(data["seed"], "seed", 0)
    if "samples" in data:
        cfg.samples = _int(data["samples"], "samples", 1)
    if "flow" in data:
        fl = _section(FlowConfig, data["flow"], "flow")
        f = FlowConfig()
        f.kind = str(fl.get("kind", f.kind))
        if f.kind not in flow.KINDS:
            raise ConfigError(f"flow.kind: expected one of {', '.join(flow.KINDS)}")
        f.k = _int(fl.get("k", f.k), "flow.k", 1)
        f.alpha = parse_complex(fl.get("alpha", 0.0), "flow.alpha")
        f.mu = parse_complex(fl.get("mu", 0.0), "flow.mu")
        if fl.get("lam") is not None:
            f.lam = _complex_list(fl["lam"], "flow.lam")
        ts = fl.get("t_span", f.t_span)
        if not isinstance(ts, (list, tuple)) or len(ts) != 2:
            raise ConfigError("flow.t_span: expected [t0, t1]")
        f.t_span = (float(ts[0]), float(ts[1]))
        if f.t_span[1] < f.t_span[0]:
            raise ConfigError("flow.t_span: t1 must not precede t0")
        f.sample_count = _int(fl.get("sample_count", f.sample_count), "flow.sample_count", 1)
        cfg.flow = f
    if "tolerances" in data:
        tols = data["tolerances"]
        if not isinstance(tols, dict):
            raise ConfigError("tolerances: expected an object")
        for name, v in tols.items():
            if name not in DEFAULT_TOLERANCES:
                raise ConfigError(f"tolerances: unknown key {name}")
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"tolerances.{name}: must be a positive number")
        cfg.tolerances = {k: float(v) for k, v in tols.items()}
    if "output" in data:
        out = _section(OutputConfig, data["output"], "output")
        cfg.output = OutputConfig(out.get("path"), out.get("format", "json"))
        if cfg.output.format not in ("json", "csv"):
            raise ConfigError("output.format: expected json or csv")
    if data.get("initial") is not None:
        ini = _section(InitialConfig, data["initial"], "initial")
        cfg.initial = InitialConfig(
            *(None if ini.get(key) is None else _complex_list(ini[key], f"initial.{key}")
              for key in ("p", "q", "P0")))
        for key in ("p", "q"):
            v = getattr(cfg.initial, key)
            if v is not None and len(v) != cfg.N:
                raise ConfigError(f"initial.{key}: expected {cfg.N} entries")
    if cfg.flow.lam is not None and len(cfg.flow.lam) != cfg.N:
        raise ConfigError(f"flow.lam: expected {cfg.N} entries")
    return cfg


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def config_echo(cfg):
    return _jsonable(dataclasses.asdict(cfg))


class Report:
    """Collects checks, data sections and per-section wall-clock time."""

    def __init__(self, command, cfg):
        self.command = command
        self.cfg = cfg
        self.checks = []
        self.data = {}
        self.artifacts = {}
        self.timing = {}

    def section(self, name):
        report = self

        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                report.timing[name] = report.timing.get(name, 0.0) + time.perf_counter() - self.t0
                return False
        return _Timer()

    def check(self, name, residual, tolerance, passed=None, **details):
        residual = None if residual is None else float(residual)
        if passed is None:
            passed = residual is not None and np.isfinite(residual) and residual <= tolerance
        entry = {"name": name, "residual": residual, "tolerance": tolerance,
                 "passed": bool(passed)}
        if details:
            entry["details"] = _jsonable(details)
        self.checks.append(entry)
        log.info("%-40s %s", name, "pass" if passed else "FAIL")
        return passed

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)

    def to_dict(self):
        return _jsonable({
            "schema": SCHEMA,
            "command": self.command,
            "config": config_echo(self.cfg),
            "passed": self.passed,
            "checks": self.checks,
            "data": self.data,
            "artifacts": self.artifacts,
            "timing": self.timing,
        })


def dumps_report(report):
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


# state construction -------------------------------------------------------

def make_family(cfg):
    return hamfam.builtin_family(cfg.family.name, cfg.N, cfg.family.phi_offset)


def initial_state(cfg, rng):
    ini = cfg.initial
    if ini is not None and ini.q is not None:
        p = ini.p if ini.p is not None else np.zeros(cfg.N)
        return PhaseState(p, ini.q)
    return hamfam.random_state(rng, cfg.N)


def flow_spec(cfg, fam):
    f = cfg.flow
    lam = f.lam if f.lam is not None else [1.0] + [0.0] * (cfg.N - 1)
    try:
        return flow.FlowSpec(fam, f.kind, f.k, alpha=f.alpha, lam=tuple(lam), mu=f.mu,
                             t_span=f.t_span, sample_count=f.sample_count)
    except ValueError as exc:
        raise ConfigError(f"flow: {exc}") from exc


# subcommands --------------------------------------------------------------

def cmd_verify(cfg):
    rep = Report("verify", cfg)
    fam = make_family(cfg)
    N = cfg.N
    with rep.section("registration"):
        fc = hamfam.check_family(fam, np.random.default_rng(cfg.seed), 32,
                                 cfg.tol("family_inverse"), cfg.tol("family_derivative"))
        ok = rep.check("family_inverse", fc["inverse_residual"], cfg.tol("family_inverse"))
        ok &= rep.check("family_derivative", fc["derivative_residual"],
                        cfg.tol("family_derivative"))
    if not ok:
        return rep
    rng = np.random.default_rng(cfg.seed)
    states = [hamfam.random_state(rng, N) for _ in range(cfg.samples)]
    gold = fam.is_goldfish
    worst = {}

    def keep(name, value):
        if value is not None:
            worst[name] = max(worst.get(name, 0.0), float(value))

    with rep.section("identities"):
        for st in states:
            keep("involution", poisson.involution_residual(fam, st))
            hs = [poisson.h(k) for k in range(1, N + 1)]
            keep("route", poisson.route_agreement(hs + [poisson.P], fam, st))
            keep("observable_route", hamfam.observables(fam, st).route_discrepancy)
            cb = poisson.coefficient_bracket_poly(poisson.eta_nodes(fam), poisson.power_nodes(), st)
            keep("coefficient_bracket", cb.residual)
            for k in range(1, N + 1):
                tr = poisson.translation_check(k, fam, st)
                keep("translation", max(tr.law, tr.double_bracket))
            if not gold:
                continue
            for alpha in (1.0, 1j):
                keep("involution_tilde", poisson.involution_residual(fam, st, alpha=alpha))
            rb = poisson.r_bracket_check(st)
            keep("r_bracket", rb.residual)
            keep("r_symmetry", rb.symmetry_residual)
            B = poisson.h_e_brackets(st)
            for k in range(0, N + 1):
                for l in range(0, N + 1):
                    if (1 <= k <= N and 1 <= l <= N) or (k < N and l < N):
                        c = poisson.closure_identity_check(k, l, st, brackets=B)
                        keep("closure", c.closed_form)
                        keep("closure_recursion", c.recursion)
            h_ext = hamfam.observables(fam, st).h_ext
            for k in range(1, N + 1):
                for l in range(k + 1, N + 1):
                    keep("commutator", poisson.commutator_check(k, l, h_ext).relative)
            keep("lambda_commutation", poisson.lambda_commutation_residual(st))
    tol_name = {"involution_tilde": "involution", "closure_recursion": "closure"}
    for name, value in worst.items():
        rep.check(name, value, cfg.tol(tol_name.get(name, name)))
    rep.data["states"] = len(states)
    return rep


def _multiset_distance(a, b):
    rs = match_roots(a, b)
    return float(np.max(np.abs(rs.roots - np.asarray(a))))


def _isochrony_period(spec):
    """2 pi / omega when the flow is isochronous with rate i omega, else None."""
    if spec.kind == "tilde_h" and spec.k == 1:
        rate = spec.alpha
    elif spec.kind == "general":
        rate = spec.mu
    else:
        return None
    rate = complex(rate)
    if rate.real != 0 or rate.imag == 0:
        return None
    return 2 * np.pi / abs(rate.imag)


def trajectory_rows(traj):
    header = ["t"]
    N = traj.spec.N
    for name in ("q", "p", "e", "h"):
        for k in range(1, N + 1):
            header += [f"{name}{k}_re", f"{name}{k}_im"]
    header += ["P_re", "P_im"]
    rows = []
    for i, t in enumerate(traj.times):
        row = [float(t)]
        for arr in (traj.q[i], traj.p[i], traj.e[i], traj.h[i]):
            for z in arr:
                row += [float(z.real), float(z.imag)]
        P = traj.P[i]
        row += [float(P.real), float(P.imag)]
        rows.append(row)
    return header, rows


def cmd_simulate(cfg):
    rep = Report("simulate", cfg)
    fam = make_family(cfg)
    spec = flow_spec(cfg, fam)
    st = initial_state(cfg, np.random.default_rng(cfg.seed))
    rep.data["initial"] = {"p": st.p, "q": st.q}
    with rep.section("integrate"):
        try:
            traj = flow.integrate(spec, st)
        except TrajectoryCollision as exc:
            rep.check("integration", None, 0.0, passed=False, error=str(exc),
                      t=exc.t, row=exc.row)
            return rep
        except StepSizeUnderflow as exc:
            rep.check("integration", None, 0.0, passed=False, error=str(exc))
            return rep
    rep.trajectory = traj
    tol = cfg.tol("drift")
    for name, d in traj.drift.items():
        rep.check(f"drift_{name}", d, tol)
    o0 = traj.observables[0]
    t = traj.times - traj.times[0]
    with rep.section("exact"):
        exact_e = None
        if spec.kind == "single_h":
            rep.check("momentum_law", flow.momentum_law_residual(traj), cfg.tol("translation"))
            if fam.is_goldfish:
                exact_e = (flow.exact_goldfish(o0, t) if spec.k == 1
                           else flow.exact_linear_flow(spec.k, o0, t))
            else:
                m = flow.moments(traj.q)
                m[:, spec.k - 1] -= t
                dev = np.max(np.abs(m - m[0]), axis=0) / np.maximum(1.0, np.abs(m[0]))
                rep.check("moment_law", float(np.max(dev)), cfg.tol("moment"))
        elif spec.kind == "tilde_h" and spec.k == 1 and spec.alpha != 0:
            exact_e = flow.exact_tilde_flow(o0, spec.alpha, t)[1]
        elif spec.kind == "general":
            exact_e = flow.exact_general_flow(o0, spec.lam, spec.mu, t)[1]
        if exact_e is not None:
            dev = float(np.max(np.abs(exact_e - traj.e)) / max(1.0, np.max(np.abs(exact_e))))
            rep.data["exact_max_deviation"] = dev
            rep.check("exact_vs_integrated", dev, cfg.tol("exact"))
    period = _isochrony_period(spec)
    T = spec.t_span[1] - spec.t_span[0]
    if period is not None and T > 0 and abs(T / period - round(T / period)) < 1e-9:
        with rep.section("isochrony"):
            first, last = traj.observables[0], traj.observables[-1]
            obs_dev = max(np.max(np.abs(last.h - first.h)) / max(1.0, np.max(np.abs(first.h))),
                          np.max(np.abs(last.e - first.e)) / max(1.0, np.max(np.abs(first.e))))
            rep.check("isochrony_observables", obs_dev, cfg.tol("isochrony_observables"))
            rep.check("isochrony_positions", _multiset_distance(traj.q[0], traj.q[-1]),
                      cfg.tol("isochrony_positions"))
    rep.data["final"] = {"p": traj.p[-1], "q": traj.q[-1]}
    rep.data["samples"] = len(traj.times)
    return rep


def cmd_separate(cfg):
    rep = Report("separate", cfg)
    fam = make_family(cfg)
    ini = cfg.initial
    if ini is not None and ini.P0 is not None:
        if ini.q is None:
            raise ConfigError("initial.P0 needs initial.q")
        sep = sepvar.SeparationData(Polynomial(ini.P0), fam)
        q0 = np.asarray(ini.q, dtype=complex)
        st = None
    else:
        st = initial_state(cfg, np.random.default_rng(cfg.seed))
        sep = sepvar.SeparationData.from_state(fam, st)
        q0 = st.q
    rep.data["P0"] = sep.P0.coeffs
    with rep.section("beta"):
        try:
            beta0 = sepvar.beta_constants(sep, q0)
        except ContourSingularity as exc:
            rep.check("beta_contours", None, 0.0, passed=False, error=str(exc),
                      k=None if exc.k is None else exc.k + 1, point=exc.point)
            return rep
    rep.data["beta"] = beta0
    if not fam.is_goldfish and fam.name == "linear":
        closed = sepvar.linear_beta(q0)
        rep.data["beta_closed_form"] = closed
        rep.check("linear_beta", float(np.max(np.abs(beta0 - closed)) / max(1.0, np.max(np.abs(closed)))),
                  cfg.tol("linear_beta"))
    if st is None:
        return rep
    with rep.section("hamilton_jacobi"):
        try:
            rep.check("hamilton_jacobi", sepvar.hamilton_jacobi_check(sep, q0),
                      cfg.tol("hamilton_jacobi"))
        except ContourSingularity as exc:
            rep.check("hamilton_jacobi", None, 0.0, passed=False, error=str(exc))
    if cfg.flow.kind != "single_h":
        return rep
    spec = flow_spec(cfg, fam)
    with rep.section("drift"):
        try:
            traj = flow.integrate(spec, st)
            B = sepvar.beta_along_path(sep, traj.q)
        except (TrajectoryCollision, ContourSingularity) as exc:
            rep.check("beta_drift", None, 0.0, passed=False, error=str(exc))
            return rep
        B[:, spec.k - 1] -= traj.times - traj.times[0]
        drift = np.max(np.abs(B - B[0]), axis=0) / np.maximum(1.0, np.abs(B[0]))
        rep.data["beta_drift"] = drift
        rep.check("beta_drift", float(np.max(drift)), cfg.tol("beta_drift"))
        rep.check("momentum_recovery",
                  max(sepvar.momentum_recovery_check(sep, s) for s in traj.states),
                  cfg.tol("superint_drift"))
    return rep


def cmd_superint(cfg):
    rep = Report("superint", cfg)
    fam = make_family(cfg)
    if not fam.is_goldfish:
        raise ConfigError("superint needs the goldfish family")
    if cfg.flow.kind != "single_h":
        raise ConfigError("superint follows a single_h flow")
    spec = flow_spec(cfg, fam)
    rng = np.random.default_rng(cfg.seed)
    st = initial_state(cfg, rng)
    si = flow.superintegrals(spec, st)
    rep.data["Lambda"] = si.Lambda
    rep.data["Phi"] = si.Phi if si.Phi is not None else {"unavailable": si.phi_note}
    with rep.section("drift"):
        try:
            traj = flow.integrate(spec, st)
        except TrajectoryCollision as exc:
            rep.check("integration", None, 0.0, passed=False, error=str(exc), row=exc.row)
            return rep
        if spec.k == 1:
            # the Lambda_{k,l} commute with h_1 only
            lams = np.array([flow.lambda_table(o) for o in traj.observables])
            scale = max(1.0, float(np.max(np.abs(lams[0]))))
            rep.check("lambda_drift", float(np.max(np.abs(lams - lams[0]))) / scale,
                      cfg.tol("superint_drift"))
        if si.Phi is not None:
            phis = np.array([flow.phi_vector(spec.k, fam, s, o)
                             for s, o in zip(traj.states, traj.observables)])
            scale = max(1.0, float(np.max(np.abs(phis[0]))))
            rep.check("phi_drift", float(np.max(np.abs(phis - phis[0]))) / scale,
                      cfg.tol("superint_drift"))
    with rep.section("rank"):
        ranks = []
        states = [st] + [hamfam.random_state(rng, cfg.N) for _ in range(cfg.samples - 1)]
        for s in states:
            r, _ = flow.jacobian_rank(fam, s)
            ranks.append(r)
        expected = 2 * cfg.N - 1
        bad = sum(r != expected for r in ranks)
        rep.data["ranks"] = ranks
        rep.check("jacobian_rank", bad, 0, passed=bad == 0, expected=expected)
    return rep


COMMANDS = {
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "separate": cmd_separate,
    "superint": cmd_superint,
}


# output -------------------------------------------------------------------

def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def report_table(rep):
    """The tabular view used for --format csv."""
    traj = getattr(rep, "trajectory", None)
    if traj is not None:
        return trajectory_rows(traj)
    if rep.command == "separate" and "beta" in rep.data:
        header = ["l", "beta_re", "beta_im"]
        return header, [[l + 1, float(b.real), float(b.imag)]
                        for l, b in enumerate(rep.data["beta"])]
    header = ["name", "residual", "tolerance", "passed"]
    return header, [[c["name"], c["residual"], c["tolerance"], c["passed"]]
                    for c in rep.checks]


def write_outputs(rep, path, fmt):
    text_json = dumps_report(rep)
    if fmt == "json":
        if path:
            traj = getattr(rep, "trajectory", None)
            if traj is not None:
                csv_path = os.path.splitext(path)[0] + ".csv"
                with open(csv_path, "w", newline="") as fh:
                    fh.write(_csv_text(*trajectory_rows(traj)))
                rep.artifacts["trajectory_csv"] = csv_path
                text_json = dumps_report(rep)
            with open(path, "w") as fh:
                fh.write(text_json)
        else:
            sys.stdout.write(text_json)
        return
    table = _csv_text(*report_table(rep))
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(table)
        rep.artifacts["table_csv"] = path
        with open(path + ".report.json", "w") as fh:
            fh.write(dumps_report(rep))
    else:
        sys.stdout.write(table)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON experiment config")
    common.add_argument("--output", default=argparse.SUPPRESS, help="report / table path")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="goldfish", parents=[common],
                                     description="Commuting-Hamiltonian experiments for goldfish-type systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "run the Poisson-bracket identity battery on random states",
        "simulate": "integrate a flow and compare with exact solutions",
        "separate": "compute separation constants and their drift",
        "superint": "superintegrals and the Jacobian rank check",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def _setup_logging(quiet):
    level = os.environ.get("GOLDFISH_LOG", "WARNING" if quiet else "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    quiet = getattr(args, "quiet", False)
    _setup_logging(quiet)
    try:
        data = {}
        if getattr(args, "config", None):
            try:
                with open(args.config) as fh:
                    data = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
        cfg = load_config(data)
        if getattr(args, "seed", None) is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            cfg.seed = args.seed
        if getattr(args, "output", None) is not None:
            cfg.output.path = args.output
        if getattr(args, "format", None) is not None:
            cfg.output.format = args.format
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            rep = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"goldfish: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GoldfishError, ValueError) as exc:
        # invalid explicit states, unknown families and the like
        print(f"goldfish: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    write_outputs(rep, cfg.output.path, cfg.output.format)
    if not quiet:
        failed = [c["name"] for c in rep.checks if not c["passed"]]
        msg = "all checks passed" if not failed else "failed: " + ", ".join(failed)
        print(f"goldfish {rep.command}: {msg}", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
