"""Command line scenario runner.

``decohere run --config cfg.json [--out DIR] [--seed N] [--workers N]``
runs one scenario and writes ``run.json`` plus one CSV per data product.
``decohere verify --suite NAME`` runs the acceptance checks.

Exit codes: 0 success, 1 verification failure, 2 invalid configuration or
input, 3 numerical failure. ``DECOHERE_LOG`` selects the log level
(``error``, ``info`` or ``debug``).

Seeding rule: the run seed ``s`` feeds ``numpy.random.SeedSequence(s)``,
whose ``spawn`` children are handed out in a fixed order per scenario
(child 0 samples states, child 1 seeds tangent vectors).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import acceptance
from .brownian import BathModel, BathSpec, ParticleInit, run as brownian_run
from .chaos import (ClassifierThresholds, SweepConfig, energy_sweep, on_shell_state,
                    poincare_section)
from .densmat import (entropy_equality_check, random_density_matrix, random_hermitian,
                      random_pure_bipartite, unitary_evolve)
from .entropy import linear_entropy, von_neumann_entropy
from .errors import DegenerateCorrelationError, DomainError, InvalidInputError, PositivityError, UndefinedTimescaleError
from .io import csv_text, json_text
from .numerics.ode import IntegrationError
from .tdhf import (VARIANTS, CouplingSpec, PotentialSpec, TdhfModel, TdhfState, TdhfTrajectory,
                   calibrate_double_well, decoherence_time_analytic, decoherence_time_numeric,
                   evolve)

SCHEMA_VERSION = 1
log = logging.getLogger("decohere")


class ConfigError(InvalidInputError):
    """The configuration document does not match the scenario schema."""


# ---------------------------------------------------------------- schema

@dataclass(frozen=True)
class Field:
    kind: str
    default: Any = None
    choices: tuple = ()
    schema: dict = field(default_factory=dict)
    nullable: bool = False


def _check(value, f: Field, path: str):
    if value is None:
        if f.nullable:
            return None
        raise ConfigError(f"{path}: value required")
    k = f.kind
    if k == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        if not np.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
        return float(value)
    if k == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if k == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true or false, got {value!r}")
        return value
    if k == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        if f.choices and value not in f.choices:
            raise ConfigError(f"{path}: must be one of {list(f.choices)}, got {value!r}")
        return value
    if k == "floats":
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{path}: expected a non-empty list of numbers")
        return [_check(v, Field("float"), f"{path}[{i}]") for i, v in enumerate(value)]
    if k == "object":
        return _resolve(value, f.schema, path)
    raise AssertionError(k)


def _resolve(given, schema: dict, path: str) -> dict:
    """Fill defaults and reject unknown keys."""
    if not isinstance(given, dict):
        raise ConfigError(f"{path}: expected an object")
    unknown = sorted(set(given) - set(schema))
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {unknown}")
    out = {}
    for key, f in schema.items():
        sub = f"{path}.{key}"
        if key in given:
            out[key] = _check(given[key], f, sub)
        elif f.kind == "object" and not f.nullable:
            out[key] = _resolve({}, f.schema, sub)
        else:
            out[key] = f.default
    return out


F, I, B, S, L, O = "float", "int", "bool", "str", "floats", "object"

ENTROPY_LAB = {
    "dim": Field(I, 4),
    "n_states": Field(I, 20),
    "t_end": Field(F, 5.0),
    "n_times": Field(I, 51),
    "dim_a": Field(I, 3),
    "dim_b": Field(I, 5),
}

BROWNIAN = {
    "big_omega": Field(F, 1.0),
    "g": Field(F, 1.0),
    "n_modes": Field(I, 256),
    "discretization": Field(S, "uniform", ("uniform", "log")),
    "log_min": Field(F, 1e-3),
    "shape": Field(O, None, schema={"x": Field(L), "F": Field(L)}, nullable=True),
    "mass": Field(F, 1.0),
    "w0": Field(F, 1.0),
    "v0": Field(F, 1.0),
    "t_end": Field(F, 10.0),
    "n_times": Field(I, 101),
    "env_entropy": Field(B, True),
}

_POT = {"mu_sq": Field(F), "lam": Field(F, 0.0)}
_STATE = {name: Field(F, dflt) for name, dflt in
          zip(("phi1", "pi1", "g1", "s1", "g2", "s2", "g12", "s12"),
              (0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0))}

TDHF = {
    "system": Field(O, None, schema=_POT, nullable=True),
    "calibrate": Field(O, None, schema={"lam": Field(F, 24.0), "e_min": Field(F, -24.3)},
                       nullable=True),
    "environment": Field(O, schema={"mu_sq": Field(F, -1.0), "lam": Field(F, 0.0)}),
    "mu12_sq": Field(F, 0.0),
    "variant": Field(S, "exact", tuple(VARIANTS)),
    "hbar": Field(F, 1.0),
    "initial": Field(O, schema=_STATE),
    "t_end": Field(F, 10.0),
    "n_out": Field(I, 1001),
    "rtol": Field(F, 1e-11),
    "atol": Field(F, 1e-13),
    "tau_window": Field(F, 0.05),
}

CHAOS = {
    "lam": Field(F, 24.0),
    "e_min": Field(F, -24.3),
    "hbar": Field(F, 1.0),
    "energies": Field(L, list(acceptance.SWEEP_ENERGIES)),
    "horizon": Field(F, 830.0),
    "dt_sample": Field(F, 0.05),
    "renorm": Field(F, 5.0),
    "x_star": Field(F, 0.0),
    "lyapunov_threshold": Field(F, 0.05),
    "regular_below": Field(F, ClassifierThresholds.regular_below),
    "chaotic_above": Field(F, ClassifierThresholds.chaotic_above),
    "emit_spectra": Field(B, True),
    "section_energies": Field(L, None, nullable=True),
    "n_crossings": Field(I, 500),
}

VERIFY = {"suite": Field(S, "all", acceptance.SUITES)}

TOLERANCES = {
    "energy_drift": Field(F, 1e-6),
    "purity_defect": Field(F, 1e-8),
}

PARAMETERS = {"entropy-lab": ENTROPY_LAB, "brownian": BROWNIAN, "tdhf": TDHF,
              "chaos-sweep": CHAOS, "verify": VERIFY}


def resolve_config(doc: dict) -> dict:
    """Validate a configuration document and fill every default."""
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a JSON object")
    unknown = sorted(set(doc) - {"scenario", "parameters", "output_dir", "seed", "tolerances"})
    if unknown:
        raise ConfigError(f"config: unknown key(s) {unknown}")
    scenario = doc.get("scenario")
    if scenario not in PARAMETERS:
        raise ConfigError(f"config.scenario: must be one of {sorted(PARAMETERS)}, got {scenario!r}")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError("config.seed: must be an unsigned 64-bit integer")
    out_dir = doc.get("output_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("config.output_dir: expected a string")
    return {
        "scenario": scenario,
        "parameters": _resolve(doc.get("parameters", {}), PARAMETERS[scenario], "parameters"),
        "output_dir": out_dir,
        "seed": seed,
        "tolerances": _resolve(doc.get("tolerances", {}), TOLERANCES, "tolerances"),
    }


# ---------------------------------------------------------------- scenarios

@dataclass
class Product:
    """Everything a scenario produces, held in memory until written."""

    summary: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    exit_code: int = 0


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _entropy_lab(cfg, seeds, workers) -> Product:
    p = cfg["parameters"]
    _require(p["dim"] >= 1 and p["n_states"] >= 1 and p["n_times"] >= 1,
             "parameters: dim, n_states and n_times must be positive")
    _require(p["dim_a"] >= 1 and p["dim_b"] >= 1, "parameters: dim_a and dim_b must be positive")
    rng = np.random.default_rng(seeds[0])
    times = np.linspace(0.0, p["t_end"], p["n_times"])
    unitary_rows, schmidt_rows, worst = [], [], 0.0
    for k in range(p["n_states"]):
        rho = random_density_matrix(p["dim"], rng)
        h = random_hermitian(p["dim"], rng)
        s0 = von_neumann_entropy(rho)
        for t in times:
            r = unitary_evolve(rho, h, t)
            s = von_neumann_entropy(r)
            worst = max(worst, abs(s - s0))
            unitary_rows.append((k, t, s, linear_entropy(r)))
        s_a, s_b, gap = entropy_equality_check(random_pure_bipartite(p["dim_a"], p["dim_b"], rng))
        schmidt_rows.append((k, p["dim_a"], p["dim_b"], s_a, s_b, gap))
    return Product(
        summary={"max_entropy_change": worst,
                 "max_schmidt_gap": max(r[-1] for r in schmidt_rows)},
        files={"unitary.csv": csv_text(("state", "t", "s_vn", "s_lin"), unitary_rows),
               "schmidt.csv": csv_text(("state", "dim_a", "dim_b", "s_a", "s_b", "gap"),
                                       schmidt_rows)})


def _brownian(cfg, seeds, workers) -> Product:
    p = cfg["parameters"]
    shape = None
    if p["shape"] is not None:
        shape = (tuple(p["shape"]["x"]), tuple(p["shape"]["F"]))
    spec = BathSpec(p["big_omega"], p["g"], shape, p["n_modes"], p["discretization"], p["log_min"])
    _require(p["mass"] > 0 and p["w0"] > 0, "parameters: mass and w0 must be positive")
    _require(p["t_end"] > 0 and p["n_times"] >= 2, "parameters: need t_end > 0 and n_times >= 2")
    model = BathModel.from_spec(ParticleInit(p["mass"], p["w0"], p["v0"]), spec)
    res = brownian_run(model, np.linspace(0.0, p["t_end"], p["n_times"]), p["env_entropy"])
    tol = cfg["tolerances"]
    diag = {"energy_drift": res.energy_drift, "purity_defect": res.purity_defect,
            "energy_drift_ok": res.energy_drift < tol["energy_drift"],
            "purity_ok": res.purity_defect < tol["purity_defect"]}
    if p["env_entropy"]:
        diag["max_particle_bath_entropy_gap"] = float(np.max(np.abs(res.s_vn - res.s_env)))
    return Product(
        summary={"alpha": res.alpha, "g0_effective": model.g0,
                 "final_width_ratio": res.width_ratio[-1],
                 "final_velocity_ratio": res.velocity_ratio[-1], "final_s_vn": res.s_vn[-1]},
        diagnostics=diag,
        files={"brownian.csv": csv_text(res.RECORD_HEADER, res.records())})


def _tdhf_potential(p) -> tuple[PotentialSpec, dict]:
    if (p["system"] is None) == (p["calibrate"] is None):
        raise ConfigError("parameters: give exactly one of 'system' or 'calibrate'")
    if p["system"] is not None:
        if p["system"]["mu_sq"] is None:
            raise ConfigError("parameters.system.mu_sq: value required")
        return PotentialSpec(p["system"]["mu_sq"], p["system"]["lam"]), {}
    c = p["calibrate"]
    pot = calibrate_double_well(c["lam"], c["e_min"], p["hbar"])
    return pot, {"calibrated_mu_sq": pot.mu_sq, "calibrated_lam": pot.lam,
                 "calibrated_e_min": c["e_min"], "hbar": p["hbar"]}


def _tdhf(cfg, seeds, workers) -> Product:
    p = cfg["parameters"]
    pot, meta = _tdhf_potential(p)
    env = PotentialSpec(p["environment"]["mu_sq"], p["environment"]["lam"])
    model = TdhfModel(pot, env, CouplingSpec(p["mu12_sq"]), p["variant"])
    state = TdhfState(**p["initial"], hbar=p["hbar"])
    tr: TdhfTrajectory = evolve(state, model, p["t_end"], p["n_out"], p["rtol"], p["atol"])
    summary = {"energy_drift": tr.energy_drift, "max_Y": float(np.max(tr.y)),
               "final_S_S": tr.entropy[-1], "advisories": tr.advisories}
    try:
        tau = decoherence_time_analytic(state, model.coupling)
        summary["tau_analytic"] = tau
        if not 0 < tau < np.inf:
            raise UndefinedTimescaleError("analytic decoherence time is not finite and positive",
                                          tau=tau)
        short = evolve(state, model, p["tau_window"] * tau, 201, p["rtol"], p["atol"])
        summary["tau_numeric"] = decoherence_time_numeric(short)
    except DegenerateCorrelationError as exc:
        summary["tau_analytic"] = summary["tau_numeric"] = None
        summary["tau_note"] = str(exc)
    except UndefinedTimescaleError as exc:
        summary["tau_numeric"] = None
        summary["tau_note"] = str(exc)
    return Product(
        summary=summary, metadata=meta,
        diagnostics={"energy_drift_ok": tr.energy_drift < cfg["tolerances"]["energy_drift"],
                     "positivity_ok": True},
        files={"tdhf.csv": csv_text(tr.RECORD_HEADER, tr.records())})


def _chaos(cfg, seeds, workers) -> Product:
    p = cfg["parameters"]
    _require(p["hbar"] >= 0, "parameters.hbar must be non-negative")
    pot = calibrate_double_well(p["lam"], p["e_min"], 1.0)
    tangent_seed = int(seeds[1].generate_state(1)[0])
    sweep = SweepConfig(pot, p["hbar"], p["horizon"], p["dt_sample"], p["renorm"], p["x_star"],
                        p["lyapunov_threshold"],
                        ClassifierThresholds(p["regular_below"], p["chaotic_above"]),
                        tangent_seed, p["emit_spectra"])
    rows = energy_sweep(sorted(p["energies"]), sweep, workers)
    files = {"phase_diagram.csv": csv_text(
        ("E", "spectral_entropy", "normalized_entropy", "lyapunov", "label", "lyapunov_label",
         "energy_drift", "error"),
        [(r.energy, r.spectral_entropy, r.normalized_entropy, r.lyapunov, r.label,
          r.lyapunov_label, r.energy_drift, r.error) for r in rows])}
    if p["emit_spectra"]:
        spec_rows = [(r.energy, f, pw) for r in rows if r.spectrum is not None
                     for f, pw in zip(*r.spectrum)]
        files["spectra.csv"] = csv_text(("E", "freq", "power"), spec_rows)
    section_info = {}
    if p["section_energies"]:
        sec_rows = []
        for e in sorted(p["section_energies"]):
            sec = poincare_section(on_shell_state(pot, e, p["hbar"]), pot, p["hbar"],
                                   p["n_crossings"])
            sec_rows += [(e, i, x, y) for i, (x, y) in enumerate(sec.points)]
            section_info[str(e)] = {"crossings": len(sec.points), "complete": sec.complete,
                                    "energy_error": sec.energy_error}
        files["sections.csv"] = csv_text(("E", "crossing_index", "phi", "pi"), sec_rows)
    decided = [r for r in rows if r.label in ("regular", "chaotic")]
    agree = (sum(r.label == r.lyapunov_label for r in decided) / len(decided)) if decided else None
    return Product(
        summary={"labels": {str(r.energy): r.label for r in rows}, "lyapunov_agreement": agree,
                 "failed_rows": sum(bool(r.error) for r in rows), "sections": section_info},
        diagnostics={"max_energy_drift": max((r.energy_drift for r in rows), default=None)},
        metadata={"calibrated_mu_sq": pot.mu_sq, "calibrated_lam": pot.lam,
                  "calibrated_e_min": p["e_min"], "tangent_seed": tangent_seed},
        files=files)


def _verify_scenario(cfg, seeds, workers) -> Product:
    results = acceptance.run_suite(cfg["parameters"]["suite"], echo=lambda s: print(s, file=sys.stderr))
    report = _report(cfg["parameters"]["suite"], results)
    return Product(summary={"passed": report["passed"], "failed": report["failed"]},
                   files={"report.json": json_text(report)},
                   exit_code=0 if not report["failed"] else 1)


SCENARIOS: dict[str, Callable] = {"entropy-lab": _entropy_lab, "brownian": _brownian,
                                  "tdhf": _tdhf, "chaos-sweep": _chaos,
                                  "verify": _verify_scenario}


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def run_scenario(cfg: dict, out_dir: Path, workers: int = 1) -> Product:
    """Run a resolved configuration and write its outputs.

    Nothing is written unless the scenario completes.
    """
    seeds = np.random.SeedSequence(cfg["seed"]).spawn(2)
    product = SCENARIOS[cfg["scenario"]](cfg, seeds, workers)
    record = {"schema_version": SCHEMA_VERSION, "tool": "decohere", "version": _version(),
              "config": cfg, "metadata": product.metadata, "summary": product.summary,
              "diagnostics": product.diagnostics, "files": sorted(product.files)}
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in product.files.items():
        (out_dir / name).write_bytes(text.encode())
    (out_dir / "run.json").write_bytes(json_text(record).encode())
    return product


def _report(suite, results) -> dict:
    return {"schema_version": SCHEMA_VERSION, "suite": suite,
            "passed": [r.number for r in results if r.passed],
            "failed": [r.number for r in results if not r.passed],
            "criteria": [r.to_dict() for r in results]}


# ---------------------------------------------------------------- entry point

def _setup_logging():
    level = os.environ.get("DECOHERE_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        print(f"warning: DECOHERE_LOG={level!r} not in {sorted(levels)}; using error",
              file=sys.stderr)
        level = "error"
    logging.basicConfig(level=levels[level], stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="decohere", description="Entropy and decoherence scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario from a JSON config")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--out", type=Path, help="output directory (overrides config)")
    r.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides config)")
    r.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    v = sub.add_parser("verify", help="run acceptance checks")
    v.add_argument("--suite", choices=acceptance.SUITES, default="all")
    v.add_argument("--report", type=Path, help="write the JSON report here instead of stdout")
    return ap


def _cmd_run(args) -> int:
    try:
        doc = json.loads(args.config.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if args.seed is not None:
        if isinstance(doc, dict):
            doc["seed"] = args.seed
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    cfg = resolve_config(doc)
    out = args.out or Path(cfg["output_dir"] or f"decohere-{cfg['scenario']}")
    cfg["output_dir"] = str(out)
    log.info("running %s into %s", cfg["scenario"], out)
    return run_scenario(cfg, out, args.workers).exit_code


def _cmd_verify(args) -> int:
    results = acceptance.run_suite(args.suite, echo=lambda s: print(s, file=sys.stderr))
    report = _report(args.suite, results)
    total = sum(r.elapsed for r in results)
    if args.suite == "all" and total > 600:
        print(f"warning: suite took {total:.0f}s, over the 10 minute budget", file=sys.stderr)
    text = json_text(report)
    if args.report:
        args.report.write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if not report["failed"] else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging()
    try:
        return _cmd_run(args) if args.command == "run" else _cmd_verify(args)
    except (InvalidInputError, DomainError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, PositivityError, UndefinedTimescaleError,
            FloatingPointError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"error: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
