"""Command-line entry point.

Subcommands: full-delegation, mic-sweep, optimize, verify, oracle. Each run
is driven by one JSON config file (strictly validated, unknown keys
rejected); numbers in CSV outputs carry 12 significant digits so identical
configs produce byte-identical files. Exit codes: 0 ok, 1 config error,
2 assumption failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import certificates, delegation, mic, oracle, persuasion
from .distributions import Distribution, check_assumptions, distribution_from_config
from .errors import AssumptionError, ConfigError, InfoDelegationError
from .experiments import expected_payoff

_FMT = "%.12g"

_TOP_KEYS = {"prior", "outside_option", "objective", "oracle", "output_dir",
             "sweep", "scenario"}
_OBJECTIVE_KEYS = {"kind", "lambda"}
_ORACLE_KEYS = {"n", "support_tol"}
_SWEEP_KEYS = {"points"}
_SCENARIO_KEYS = {"name", "r0", "peaks", "pinch"}


@dataclass
class RunConfig:
    prior: Distribution
    outside_option: Distribution
    objective: delegation.DesignerObjective
    oracle_n: int = 201
    support_tol: float = 1e-9
    output_dir: str = "out"
    sweep_points: int = 257
    scenario: dict = field(default_factory=dict)


def _reject_unknown(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _parse_objective(cfg: dict) -> delegation.DesignerObjective:
    _reject_unknown(cfg, _OBJECTIVE_KEYS, "objective")
    kind = cfg.get("kind", "dm_value")
    if kind == "dm_value":
        if "lambda" in cfg:
            raise ConfigError("dm_value objective takes no lambda")
        return delegation.DesignerObjective.dm_value()
    if kind == "welfare_weighted":
        if "lambda" not in cfg:
            raise ConfigError("welfare_weighted objective needs lambda")
        return delegation.DesignerObjective.welfare_weighted(float(cfg["lambda"]))
    raise ConfigError(f"unknown objective kind {kind!r}"
                      " (config files support dm_value and welfare_weighted)")


def load_config(path: str | Path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "config")
    for key in ("prior", "outside_option"):
        if key not in raw:
            raise ConfigError(f"config is missing {key!r}")
    prior = distribution_from_config(raw["prior"])
    outside = distribution_from_config(raw["outside_option"])
    objective = _parse_objective(raw.get("objective", {"kind": "dm_value"}))
    oracle_cfg = raw.get("oracle", {})
    _reject_unknown(oracle_cfg, _ORACLE_KEYS, "oracle")
    n = int(oracle_cfg.get("n", 201))
    support_tol = float(oracle_cfg.get("support_tol", 1e-9))
    if support_tol <= 0.0:
        raise ConfigError(f"support_tol must be positive, got {support_tol}")
    sweep_cfg = raw.get("sweep", {})
    _reject_unknown(sweep_cfg, _SWEEP_KEYS, "sweep")
    points = int(sweep_cfg.get("points", 257))
    if points < 2:
        raise ConfigError(f"sweep points must be >= 2, got {points}")
    scenario = raw.get("scenario", {})
    _reject_unknown(scenario, _SCENARIO_KEYS, "scenario")
    cfg = RunConfig(prior=prior, outside_option=outside, objective=objective,
                    oracle_n=n, support_tol=support_tol,
                    output_dir=str(raw.get("output_dir", "out")),
                    sweep_points=points, scenario=dict(scenario))
    _check_grid(cfg.oracle_n)
    return cfg


def _check_grid(n: int) -> None:
    if n < 51 or n % 2 == 0:
        raise ConfigError(f"oracle grid size must be odd and >= 51, got {n}")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_FMT % v for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _assumption_dict(report) -> dict:
    return {"s_shape_ok": report.s_shape_ok,
            "informativeness_ok": report.informativeness_ok,
            "r0": report.r0, "mu": report.mu, "margin": report.margin,
            "notes": list(report.notes)}


def _icdf_curve_rows(prior: Distribution, experiment, points: int = 513):
    mu = prior.mean
    grid = sorted(set(np.linspace(0.0, 1.0, points).tolist())
                  | set(experiment.breakpoints()))
    for m in grid:
        yield (m, prior.integrated_cdf(m), max(0.0, m - mu), experiment.icdf(m))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_full_delegation(cfg: RunConfig, out: Path) -> int:
    pair, experiment = persuasion.solve_full_delegation(cfg.prior, cfg.outside_option)
    report = check_assumptions(cfg.prior, cfg.outside_option)
    atom_mass = 1.0 - cfg.prior.cdf(pair.x)
    payoff = expected_payoff(experiment, cfg.outside_option.cdf)
    _write_json(out / "full_delegation_report.json", {
        "x_star": pair.x, "y_star": pair.y, "atom_mass": atom_mass,
        "experimenter_payoff": payoff, "assumptions": _assumption_dict(report)})
    _write_csv(out / "icdf_curves.csv", ["m", "I_H", "I_deltamu", "I_F"],
               _icdf_curve_rows(cfg.prior, experiment))
    print(f"full delegation: x*={pair.x:.12g} y*={pair.y:.12g}"
          f" atom_mass={atom_mass:.12g} payoff={payoff:.12g}")
    return 0


def cmd_mic_sweep(cfg: RunConfig, out: Path) -> int:
    family = mic.build_mic_family(cfg.prior, cfg.outside_option)
    u = cfg.objective.utility(cfg.outside_option)
    rows = []
    for v in np.linspace(family.y_min, family.y_max, cfg.sweep_points):
        y = float(v)
        dc, experiment = mic.mic_from_top_atom(family, y)
        rows.append((y, dc.s, dc.t, dc.x,
                     expected_payoff(experiment, u),
                     expected_payoff(experiment, cfg.outside_option.cdf)))
    _write_csv(out / "mic_sweep.csv", ["y", "s", "t", "x", "U_D", "U_E"], rows)
    _write_json(out / "mic_sweep_meta.json", {
        "y_min": family.y_min, "y_max": family.y_max,
        "binding_constraint": family.binding_constraint,
        "points": cfg.sweep_points})
    print(f"mic sweep: y in [{family.y_min:.12g}, {family.y_max:.12g}],"
          f" binding constraint: {family.binding_constraint}")
    return 0


def cmd_optimize(cfg: RunConfig, out: Path) -> int:
    family = mic.build_mic_family(cfg.prior, cfg.outside_option)
    solution = delegation.optimize(cfg.objective, family)
    dc = solution.censorship
    restriction = certificates.implementing_restriction(cfg.prior, dc)
    pair = persuasion.TangencyPair(x=dc.x, y=dc.y)
    price = certificates.canonical_price_function(cfg.outside_option, pair)
    cert = certificates.verify_ic(cfg.outside_option, solution.experiment, price)
    full_payoff = delegation.designer_payoff(cfg.objective, family, family.y_min)
    report = check_assumptions(cfg.prior, cfg.outside_option)
    _write_json(out / "optimize_report.json", {
        "y_opt": solution.y_opt, "s": dc.s, "t": dc.t, "x": dc.x,
        "payoff": solution.payoff,
        "payoff_full_delegation": full_payoff,
        "gain_over_full_delegation": solution.payoff - full_payoff,
        "binding_at_y_max": solution.binding_at_y_max,
        "binding_at_y_min": solution.binding_at_y_min,
        "binding_constraint": family.binding_constraint,
        "objective": solution.objective_kind,
        "certificate": {"convex_ok": cert.convex_ok,
                        "dominates_ok": cert.dominates_ok,
                        "support_contact_ok": cert.support_contact_ok},
        "restriction_segments": len(restriction.segments),
        "assumptions": _assumption_dict(report)})
    _write_csv(out / "icdf_curves.csv", ["m", "I_H", "I_deltamu", "I_F"],
               _icdf_curve_rows(cfg.prior, solution.experiment))
    _write_csv(out / "certificate_curve.csv", ["m", "G", "p"],
               certificates.certificate_curve(cfg.outside_option, price))
    print(f"optimal restriction: y_opt={solution.y_opt:.12g}"
          f" (s={dc.s:.12g}, x={dc.x:.12g}, t={dc.t:.12g})"
          f" payoff={solution.payoff:.12g}"
          f" boundary={'y_max' if solution.binding_at_y_max else 'interior'}")
    return 0


def cmd_oracle(cfg: RunConfig, out: Path, scenario: str | None) -> int:
    name = scenario or cfg.scenario.get("name", "default")
    if name == "uninformed_dm":
        r0 = float(cfg.scenario.get("r0", 0.7))
        instance = oracle.make_instance(cfg.prior, oracle.step_payoff(r0), cfg.oracle_n)
        report = oracle.scenario_uninformed_dm(instance, r0)
        payload = {"scenario": report.name, "value": report.value,
                   "max_support": report.max_support, "bound_ok": report.bound_ok,
                   "support_count": report.support_count, "details": report.details}
        _write_json(out / "oracle_report.json", payload)
        print(f"oracle scenario {name}: value={report.value:.12g}"
              f" max_support={report.max_support:.12g} bound_ok={report.bound_ok}")
        return 0
    if name == "m_shaped":
        peaks = tuple(cfg.scenario.get("peaks", (0.3, 0.75)))
        pinch = float(cfg.scenario.get("pinch", 2.0))
        report = oracle.scenario_m_shaped(cfg.prior, cfg.oracle_n, peaks, pinch)
        payload = {"scenario": report.name, "value": report.value,
                   "max_support": report.max_support, "bound_ok": report.bound_ok,
                   "support_count": report.support_count, "details": report.details}
        _write_json(out / "oracle_report.json", payload)
        print(f"oracle scenario {name}: value={report.value:.12g}"
              f" atoms={report.support_count} bound_ok={report.bound_ok}")
        return 0
    if name != "default":
        raise ConfigError(f"unknown scenario {name!r};"
                          " expected default, uninformed_dm, or m_shaped")
    instance = oracle.make_instance(cfg.prior, cfg.outside_option.cdf, cfg.oracle_n)
    u = cfg.objective.utility(cfg.outside_option)
    designer = np.array([u(float(v)) for v in instance.grid])
    plan, result, value = oracle.lp_best_reply(
        instance, instance.prior_mass, designer_payoff=designer)
    structure = oracle.bipooling_structure(result, instance)
    full_rev = oracle.ic_check_discrete(instance, instance.prior_mass)
    _write_csv(out / "oracle_instance.csv", ["m", "prior_mass", "payoff"],
               zip(instance.grid, instance.prior_mass, instance.payoff))
    _write_csv(out / "oracle_result.csv", ["m", "restriction_mass", "best_reply_mass"],
               zip(instance.grid, instance.prior_mass, result.mass))
    _write_csv(out / "oracle_plan.csv", [f"to_{_FMT % v}" for v in instance.grid],
               plan.q)
    _write_json(out / "oracle_report.json", {
        "value": value,
        "grid_points": instance.n,
        "pooling_intervals": len(structure.intervals),
        "max_atoms_per_interval": structure.max_atoms_per_interval,
        "full_revelation_ic": full_rev.is_ic,
        "full_revelation_improvement": full_rev.improvement})
    print(f"oracle: best-reply value {value:.12g} on n={instance.n};"
          f" {len(structure.intervals)} pooling interval(s),"
          f" max atoms per interval {structure.max_atoms_per_interval}")
    return 0


def _verify_checks(cfg: RunConfig, scenario: str | None) -> list[tuple[str, bool, str]]:
    checks: list[tuple[str, bool, str]] = []
    report = check_assumptions(cfg.prior, cfg.outside_option)
    checks.append(("assumptions", report.s_shape_ok and report.informativeness_ok,
                   f"margin={report.margin:.6g}"))
    family = mic.build_mic_family(cfg.prior, cfg.outside_option)
    pair = family.full_delegation
    residual = abs(persuasion.rho(cfg.outside_option, pair.x, pair.y))
    checks.append(("full_delegation_tangency", residual <= 1e-9,
                   f"residual={residual:.3e}"))

    cert_ok, cert_detail = True, "all pass"
    for v in np.linspace(family.y_min, family.y_max, 50):
        dc, experiment = mic.mic_from_top_atom(family, float(v))
        price = certificates.canonical_price_function(
            cfg.outside_option, persuasion.TangencyPair(x=dc.x, y=dc.y))
        rep = certificates.verify_ic(cfg.outside_option, experiment, price)
        if not rep.ok:
            cert_ok, cert_detail = False, f"y={float(v):.6g}: {rep.max_violations}"
            break
    checks.append(("certificates_on_sweep", cert_ok, cert_detail))

    deriv = delegation.perturbation_derivative(cfg.objective, family)
    positive_required = (cfg.objective.kind != "welfare_weighted"
                         or cfg.objective.lam > 0.0)
    checks.append(("perturbation_derivative_sign",
                   deriv > 0.0 if positive_required else abs(deriv) <= 1e-9,
                   f"value={deriv:.6g}"))

    scan = mic.feasibility_scan(family, points=1000)
    checks.append(("feasible_range_interval", scan["interval_ok"],
                   "no feasible points beyond range" if scan["interval_ok"]
                   else f"beyond: {scan['feasible_beyond_range'][:3]}"))

    instance = oracle.make_instance(cfg.prior, cfg.outside_option.cdf, cfg.oracle_n)
    # one full-size solve serves three checks: value agreement, structure of
    # the best reply, and the full-revelation refutation
    plan, result, value = oracle.lp_best_reply(instance, instance.prior_mass)
    analytic = expected_payoff(
        mic.mic_from_top_atom(family, family.y_min)[1], cfg.outside_option.cdf)
    checks.append(("oracle_value_agreement", abs(value - analytic) <= 0.01,
                   f"lp={value:.6g} analytic={analytic:.6g}"))
    structure = oracle.bipooling_structure(result, instance)
    r0 = cfg.outside_option.mode
    checks.append(("oracle_bipooling", not structure.flagged
                   and structure.atom_clusters_above(r0) <= 1,
                   f"max_atoms={structure.max_atoms_per_interval},"
                   f" above_r0={structure.atom_clusters_above(r0)}"))
    star = oracle.discretize_experiment(
        mic.mic_from_top_atom(family, family.y_min)[1], instance)
    star_ic = oracle.ic_check_discrete(instance, star)
    checks.append(("oracle_ic_full_delegation", star_ic.is_ic,
                   f"improvement={star_ic.improvement:.6g}"))
    frev_improvement = max(0.0, value - float(instance.payoff @ instance.prior_mass))
    checks.append(("oracle_refutes_full_revelation",
                   frev_improvement > oracle.IC_TOL_SCALE / instance.n,
                   f"improvement={frev_improvement:.6g}"))
    for y in np.linspace(family.y_min, family.y_max, 5):
        member = oracle.discretize_experiment(
            mic.mic_from_top_atom(family, float(y))[1], instance)
        member_ic = oracle.ic_check_discrete(instance, member)
        member_structure = oracle.bipooling_structure(member, instance)
        ok = (member_ic.is_ic and not member_structure.flagged
              and member_structure.atom_clusters_above(r0) <= 1)
        checks.append((f"oracle_family_y_{float(y):.6g}", ok,
                       f"improvement={member_ic.improvement:.6g}"))

    if scenario == "uninformed_dm":
        r0_step = float(cfg.scenario.get("r0", 0.7))
        step_instance = oracle.make_instance(
            cfg.prior, oracle.step_payoff(r0_step), cfg.oracle_n)
        rep = oracle.scenario_uninformed_dm(step_instance, r0_step)
        checks.append(("scenario_uninformed_dm", rep.bound_ok,
                       f"value={rep.value:.6g} max_support={rep.max_support:.6g}"))
    elif scenario == "m_shaped":
        peaks = tuple(cfg.scenario.get("peaks", (0.3, 0.75)))
        rep = oracle.scenario_m_shaped(
            cfg.prior, cfg.oracle_n, peaks, float(cfg.scenario.get("pinch", 2.0)))
        checks.append(("scenario_m_shaped", rep.bound_ok,
                       f"atoms={rep.support_count} at {rep.details['atom_locations']}"))
    return checks


def cmd_verify(cfg: RunConfig, out: Path, scenario: str | None) -> int:
    checks = _verify_checks(cfg, scenario)
    all_ok = all(ok for _, ok, _ in checks)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    _write_json(out / "verify_report.json", {
        "all_ok": all_ok,
        "checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in checks]})
    if not all_ok:
        first = next(name for name, ok, _ in checks if not ok)
        print(f"verification failed at: {first}", file=sys.stderr)
        return 3
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infodelegation",
        description="Optimal delegation sets for information provision")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("full-delegation", "mic-sweep", "optimize", "verify", "oracle"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--grid", type=int, default=None,
                       help="oracle grid size (odd, >= 51; overrides config)")
        p.add_argument("--scenario", default=None,
                       choices=["default", "uninformed_dm", "m_shaped"],
                       help="oracle/verify scenario")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.grid is not None:
            _check_grid(args.grid)
            cfg.oracle_n = args.grid
        out = Path(args.out if args.out is not None else cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "full-delegation":
            return cmd_full_delegation(cfg, out)
        if args.command == "mic-sweep":
            return cmd_mic_sweep(cfg, out)
        if args.command == "optimize":
            return cmd_optimize(cfg, out)
        if args.command == "oracle":
            return cmd_oracle(cfg, out, args.scenario)
        return cmd_verify(cfg, out, args.scenario)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except AssumptionError as exc:
        margin = exc.report.margin if exc.report is not None else float("nan")
        print(f"assumption failure: {exc} (margin {margin:.6g})", file=sys.stderr)
        return 2
    except InfoDelegationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
