"""Command-line driver.

Every subcommand resolves its parameters from built-in defaults, then an
optional JSON ``--config`` file, then explicit flags. Exit codes: 0 when all
checks pass, 2 when violations were found, 1 on usage or config errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, counterexamples as ce, lindblad, serialization, verifier
from .errors import ConfigInvalid, PassivityLabError
from .majorization import Relation, compare

log = logging.getLogger("passivity_lab")

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2

COMMON_DEFAULTS = {"seed": 42, "out": "results"}

COMMAND_DEFAULTS = {
    "verify-theorem": {
        "dim": None,
        "dims": [2, 3, 4, 5, 6],
        "trials": 100,
        "t_grid": [0.1, 0.3, 1.0, 3.0],
        "tol": 1e-9,
        "passive_tol": 1e-10,
        "generator": None,
        "rank": None,
    },
    "evolve": {
        "dim": 4,
        "generator": None,
        "populations": None,
        "rank": None,
        "t_grid": [0.0, 0.5, 1.0, 2.0, 3.0],
        "tol": 1e-9,
        "dump_generator": None,
    },
    "compare": {"p": None, "q": None, "file": None, "tol": 1e-10},
    "counterexample": {
        "name": None,
        "t_max": 3.0,
        "t_step": 0.1,
        "t_grid": None,
        "cutoff": 5,
        "gamma0": 1.0,
        "nbar": 0.5,
        "trials": 500,
        "tol": 1e-10,
    },
    "lambdas": {"dim": 6, "generator": None},
}

COUNTEREXAMPLES = ("attenuator", "two-qubit-multijump", "two-qubit-degenerate", "finite-temp-qubit")


# -- config handling ----------------------------------------------------------


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _key_line(src: str, key: str):
    for n, line in enumerate(src.splitlines(), 1):
        if f'"{key}"' in line:
            return n
    return None


def load_config(path) -> tuple[dict, str]:
    try:
        src = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        doc = json.loads(src)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigInvalid(f"{path}:1: config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in doc.items()}, src


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(COMMAND_DEFAULTS[command])
    src, path = "", None
    if args.config:
        path = args.config
        doc, src = load_config(path)
        for key, value in doc.items():
            if key == "command":
                continue
            if key not in cfg:
                line = _key_line(src, key)
                where = f"{path}:{line}" if line else str(path)
                raise ConfigInvalid(f"{where}: unknown key {key!r} for command {command!r}")
            cfg[key] = value
    for key in cfg:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag

    def fail(key, msg):
        line = _key_line(src, key) if src else None
        where = f"{path}:{line}: " if line else (f"{path}: " if path else "")
        raise ConfigInvalid(f"{where}{key}: {msg}")

    try:
        cfg["seed"] = int(cfg["seed"])
    except (TypeError, ValueError):
        fail("seed", "must be an integer")
    for key in ("tol", "passive_tol"):
        if key in cfg:
            try:
                cfg[key] = float(cfg[key])
            except (TypeError, ValueError):
                fail(key, "must be a number")
            if not cfg[key] > 0:
                fail(key, "tolerances must be positive")
    if cfg.get("t_grid") is not None:
        try:
            grid = _floats(cfg["t_grid"])
        except ValueError:
            fail("t_grid", "must be a list of numbers")
        if not grid:
            fail("t_grid", "must not be empty")
        if any(t < 0 for t in grid):
            fail("t_grid", "times must be non-negative")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            fail("t_grid", "times must be sorted ascending")
        cfg["t_grid"] = grid
    for key in ("trials", "dim", "rank", "cutoff"):
        if cfg.get(key) is not None:
            try:
                cfg[key] = int(cfg[key])
            except (TypeError, ValueError):
                fail(key, "must be an integer")
            if cfg[key] < 1:
                fail(key, "must be >= 1")
    if command == "counterexample":
        if cfg["name"] not in COUNTEREXAMPLES:
            fail("name", f"must be one of {', '.join(COUNTEREXAMPLES)}")
        for key in ("t_max", "t_step", "gamma0", "nbar"):
            cfg[key] = float(cfg[key])
            if not cfg[key] > 0:
                fail(key, "must be positive")
    cfg["command"] = command
    return cfg


def _provenance(cfg) -> dict:
    return {
        "command": cfg["command"],
        "config_hash": serialization.config_hash(cfg),
        "seed": cfg["seed"],
        "version": __version__,
    }


def _out(cfg, name) -> Path:
    return Path(cfg["out"]) / name


# -- commands -----------------------------------------------------------------


def _ladder(dim):
    return lindblad.build_generator(dim, jumps=[np.sqrt(np.arange(1, dim))])


def cmd_verify_theorem(cfg) -> int:
    prov = _provenance(cfg)
    started = time.perf_counter()
    if cfg["generator"]:
        G = serialization.load_generator(cfg["generator"])
        maj = verifier.verify_main_theorem(
            G, trials=cfg["trials"], t_grid=cfg["t_grid"], tol=cfg["tol"],
            seed=cfg["seed"], rank=cfg["rank"],
        )
        pas = verifier.verify_passive_preservation(
            G, verifier.spectrum_of(verifier.random_density(G.dim, None, cfg["seed"])),
            cfg["t_grid"], cfg["passive_tol"], seed=cfg["seed"],
        )
    else:
        dims = [cfg["dim"]] if cfg["dim"] else [int(d) for d in cfg["dims"]]
        maj, pas = verifier.verify_random_generators(
            dims, cfg["trials"], cfg["t_grid"], cfg["tol"],
            seed=cfg["seed"], passive_tol=cfg["passive_tol"],
        )
    runtime = time.perf_counter() - started
    payload = {
        "config": {k: v for k, v in cfg.items() if not k.startswith("out")},
        "majorization": maj.to_dict(),
        "passivity": pas.to_dict(),
    }
    serialization.write_json(_out(cfg, "verify_theorem.json"), payload, prov)
    cols = ["seed", "t", "n", "gap"]
    serialization.write_csv(_out(cfg, "verify_theorem.csv"), serialization.report_rows(maj), cols, prov)
    serialization.write_csv(
        _out(cfg, "verify_theorem_passivity.csv"), serialization.report_rows(pas), cols, prov
    )
    print(
        f"verify-theorem: {maj.trials} trials, majorization violations {len(maj.violations)} "
        f"(min gap {maj.min_gap:.3e}), passivity violations {len(pas.violations)}; "
        f"{runtime:.1f}s"
    )
    return EXIT_OK if maj.ok and pas.ok else EXIT_VIOLATION


def cmd_evolve(cfg) -> int:
    prov = _provenance(cfg)
    if cfg["generator"]:
        G = serialization.load_generator(cfg["generator"])
    else:
        G = _ladder(cfg["dim"])
    d = G.dim
    if cfg["populations"] is not None:
        pops = _floats(cfg["populations"])
        if len(pops) != d:
            raise ConfigInvalid(f"populations: expected {d} values, got {len(pops)}")
        rho = np.diag(np.asarray(pops, dtype=complex))
    else:
        rho = verifier.random_density(d, cfg["rank"], cfg["seed"])
    if cfg["dump_generator"]:
        serialization.dump_generator(G, cfg["dump_generator"], prov)
    traj = verifier.sn_trajectory(G, rho, cfg["t_grid"])
    rows = []
    for k, t in enumerate(traj.times):
        s, sp = traj.s[k], traj.s_passive[k]
        row = {"t": float(t)}
        p = np.diff(np.concatenate([[0.0], s]))
        row.update({f"p_{i + 1}": float(v) for i, v in enumerate(p)})
        row.update({f"s_{i + 1}": float(v) for i, v in enumerate(s)})
        row.update({f"s_passive_{i + 1}": float(v) for i, v in enumerate(sp)})
        row["majorized_by_passive"] = bool(np.all(sp[:-1] - s[:-1] >= -cfg["tol"]))
        rows.append(row)
    serialization.write_csv(_out(cfg, "evolve.csv"), rows, provenance=prov)
    ok = all(r["majorized_by_passive"] for r in rows)
    print(f"evolve: d={d}, {len(rows)} times, passive output majorizes: {ok}")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_compare(cfg) -> int:
    if cfg["file"]:
        with open(cfg["file"]) as fh:
            doc = json.load(fh)
        p, q = doc.get("p"), doc.get("q")
    else:
        p, q = cfg["p"], cfg["q"]
    if p is None or q is None:
        raise ConfigInvalid("compare needs both --p and --q (or --file)")
    verdict = compare(_floats(p), _floats(q), cfg["tol"])
    print(verdict.relation.value)
    print("gaps: " + ",".join(f"{g:.17g}" for g in verdict.gaps))
    if cfg.get("out_given"):
        serialization.write_json(
            _out(cfg, "compare.json"),
            {"relation": verdict.relation.value, "gaps": list(verdict.gaps), "tol": verdict.tol},
            _provenance(cfg),
        )
    return EXIT_OK


def _grid(cfg):
    if cfg["t_grid"] is not None:
        return np.asarray(cfg["t_grid"])
    n = int(round(cfg["t_max"] / cfg["t_step"]))
    return np.arange(n + 1) * cfg["t_step"]


def _run_attenuator(cfg):
    N = cfg["cutoff"]
    times = _grid(cfg)
    rows = ce.attenuator_series(times, N)
    crossing = None
    lo, hi = 1.0, min(1.5, float(times[-1]))
    if hi > lo:
        f_lo = ce.attenuator_numeric(lo, N, check=False).numeric
        f_hi = ce.attenuator_numeric(hi, N, check=False).numeric
        if (f_lo.s3 - f_lo.s3_tilde) * (f_hi.s3 - f_hi.s3_tilde) < 0:
            crossing = ce.attenuator_crossing_time(N, (lo, hi), xtol=1e-9)
            rows.append(ce.attenuator_series([crossing], N)[0])
            rows.sort(key=lambda r: r["t"])
    dev = max(
        abs(r[k] - r[f"{k}_closed"]) for r in rows for k in ("s3", "s3_tilde", "p1", "p1_tilde")
    )
    checks = {
        "closed_form_agreement": dev <= ce.CLOSED_FORM_TOL,
        "p1_exceeds_p1_tilde": all(r["p1"] > r["p1_tilde"] for r in rows if r["t"] > 0),
        "incomparable_after_t0": all(
            r["verdict"] == Relation.INCOMPARABLE.value
            for r in rows if r["t"] > ce.T0_ATTENUATOR + 1e-6
        ),
    }
    if crossing is not None:
        checks["crossing_matches_t0"] = abs(crossing - ce.T0_ATTENUATOR) <= 1e-6
    summary = {
        "cutoff": N,
        "crossing_time": crossing,
        "t0_exact": ce.T0_ATTENUATOR,
        "max_closed_form_deviation": dev,
        "checks": checks,
    }
    return rows, summary


def _run_two_qubit(cfg, variant):
    times = _grid(cfg)
    rows = ce.two_qubit_series(times, variant)
    dev = max(
        abs(r[k] - r[f"{k}_closed"])
        for r in rows for k in r if f"{k}_closed" in r
    )
    try:
        lindblad.build_generator_from_raw(ce.two_qubit_generator())
        rejected = False
    except PassivityLabError:
        rejected = True
    checks = {
        "closed_form_agreement": dev <= 1e-9,
        "rho0_rho1_passive": all(r["rho0_passive"] and r["rho1_passive"] for r in rows),
        "incomparable_for_t_positive": all(
            r["verdict"] == Relation.INCOMPARABLE.value for r in rows if r["t"] > 0
        ),
        "generator_rejected_by_single_jump_validation": rejected,
    }
    summary = {"variant": variant, "max_closed_form_deviation": dev, "checks": checks}
    return rows, summary


def _run_finite_temp(cfg):
    params = ce.FiniteTempParams(cfg["gamma0"], cfg["nbar"])
    times = _grid(cfg)
    rows = ce.finite_temp_series(params, times, cfg["trials"], cfg["seed"])
    dev = max(abs(r[k] - r[f"{k}_closed"]) for r in rows for k in ("x", "y", "z"))
    asymptotic = (1 + params.z_inf**2) / 2
    checks = {
        "bloch_closed_form_agreement": dev <= 1e-9,
        "optimal_purity_dominates": all(
            r["purity_optimal"] >= r["purity_best_random"] - 1e-10 for r in rows
        ),
        "asymptotic_purity": abs(ce.optimal_coherent_state(params)[1](60 / params.gamma) - asymptotic)
        <= 1e-10,
    }
    summary = {
        "gamma0": params.gamma0,
        "nbar": params.nbar,
        "gamma": params.gamma,
        "z_inf": params.z_inf,
        "beta": params.beta,
        "optimal_bloch": list(ce.optimal_coherent_state(params)[0].as_array()),
        "asymptotic_purity": asymptotic,
        "max_closed_form_deviation": dev,
        "checks": checks,
    }
    return rows, summary


def cmd_counterexample(cfg) -> int:
    name = cfg["name"]
    if name == "attenuator":
        rows, summary = _run_attenuator(cfg)
    elif name.startswith("two-qubit-"):
        rows, summary = _run_two_qubit(cfg, name.removeprefix("two-qubit-"))
    else:
        rows, summary = _run_finite_temp(cfg)
    prov = _provenance(cfg)
    stem = name.replace("-", "_")
    serialization.write_csv(_out(cfg, f"{stem}.csv"), rows, provenance=prov)
    serialization.write_json(_out(cfg, f"{stem}.json"), summary, prov)
    failed = [k for k, v in summary["checks"].items() if not v]
    for k, v in summary["checks"].items():
        print(f"{name}: {k}: {'pass' if v else 'FAIL'}")
    if summary.get("crossing_time") is not None:
        print(f"{name}: crossing time {summary['crossing_time']:.9f} (ln(2+sqrt 2) = {ce.T0_ATTENUATOR:.9f})")
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_lambdas(cfg) -> int:
    if cfg["generator"]:
        G = serialization.load_generator(cfg["generator"], check_concavity=False)
    else:
        G = _ladder(cfg["dim"])
    lam = lindblad.lambdas(G)
    r = G.r_profile
    rows = [{"n": n, "r_n": float(r[n]), "lambda_n": float(lam[n - 1])} for n in range(1, G.dim)]
    serialization.write_csv(_out(cfg, "lambdas.csv"), rows, ["n", "r_n", "lambda_n"], _provenance(cfg))
    print(f"{'n':>3} {'r_n':>22} {'lambda_n':>22}")
    for row in rows:
        print(f"{row['n']:>3} {row['r_n']:>22.15g} {row['lambda_n']:>22.15g}")
    concave = lindblad.concavity_violation(r) is None
    nonneg = bool(np.all(lam >= -1e-12))
    if not concave:
        print("jump profile is not concave")
    return EXIT_OK if concave and nonneg else EXIT_VIOLATION


COMMANDS = {
    "verify-theorem": cmd_verify_theorem,
    "evolve": cmd_evolve,
    "compare": cmd_compare,
    "counterexample": cmd_counterexample,
    "lambdas": cmd_lambdas,
}


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--seed", type=int, help="master seed (default 42)")
    common.add_argument("--tol", type=float, help="verdict tolerance")
    common.add_argument("--t-grid", dest="t_grid", help="comma-separated ascending times")
    common.add_argument("--dim", type=int, help="Hilbert space dimension")
    common.add_argument("--trials", type=int, help="number of random trials")
    common.add_argument("--out", help="output directory (default ./results)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="passivity-lab", description="Passive-state optimality checks for lossy channels."
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-theorem", parents=[common], help="Monte-Carlo sweep of the main theorem")
    p.add_argument("--generator", help="generator JSON; default draws a random valid generator per trial")
    p.add_argument("--rank", type=int, help="rank of random inputs (default full)")

    p = sub.add_parser("evolve", parents=[common], help="spectrum trajectory of one evolution")
    p.add_argument("--generator", help="generator JSON (default: truncated ladder of --dim)")
    p.add_argument("--populations", help="diagonal input populations, comma-separated")
    p.add_argument("--rank", type=int, help="rank of the random input when no populations are given")
    p.add_argument("--dump-generator", dest="dump_generator", help="write the generator JSON here")

    p = sub.add_parser("compare", parents=[common], help="majorization verdict for two spectra")
    p.add_argument("--p", help="first spectrum, comma-separated")
    p.add_argument("--q", help="second spectrum, comma-separated")
    p.add_argument("--file", help='JSON file {"p": [...], "q": [...]}')

    p = sub.add_parser("counterexample", parents=[common], help="reproduce a counterexample")
    p.add_argument("name", choices=COUNTEREXAMPLES)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--t-step", dest="t_step", type=float)
    p.add_argument("--cutoff", type=int, help="Fock cutoff N for the attenuator (>= 5)")
    p.add_argument("--gamma0", type=float)
    p.add_argument("--nbar", type=float, help="mean bath occupation N")

    p = sub.add_parser("lambdas", parents=[common], help="lambda_n table for a generator")
    p.add_argument("--generator", help="generator JSON (default: truncated ladder of --dim)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = resolve_config(args.command, args)
        cfg["out_given"] = args.out is not None
        return COMMANDS[args.command](cfg)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (PassivityLabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
