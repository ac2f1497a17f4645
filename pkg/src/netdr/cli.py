"""Command line entry point.

Usage::

    netdr run experiment.cfg
    netdr central experiment.cfg
    netdr gen-network 6 0
    netdr audit out/ledger.txt

Config files are flat ``key = value`` lines with ``#`` comments.  Relative
paths inside a config are resolved against the config file's directory.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ballproj import InfeasibleConstraint
from .central import solve_central
from .datasplit import (
    SCHEMES,
    GlobalData,
    SplitError,
    generate_data,
    load_data,
    masks_from_text,
    preset_masks,
    split_from_masks,
)
from .prox import REGULARIZERS, get_regularizer
from .simnet import audit_ledger, ledger_from_text, ledger_to_text, simulate
from .topology import Network, TopologyError, load_network, random_walk_network

log = logging.getLogger("netdr")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_CENTRAL = 0, 2, 3, 4

REQUIRED = ("data", "split", "network", "f", "eps", "lambda", "rho", "max_iter", "output")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    data: str
    split: str
    network: str
    f: str
    eps: float
    lam: float
    rho: float
    max_iter: int
    output: Path
    n: int | None = None
    p: int | None = None
    data_seed: int = 0
    x_path: Path | None = None
    y_path: Path | None = None
    split_seed: int = 0
    overlap: float = 0.1
    mask_path: Path | None = None
    m: int | None = None
    network_seed: int = 0
    network_path: Path | None = None
    stop_tol: float = 0.0
    probe: int = 1
    stride: int = 1
    central_max_iter: int = 1_000_000
    central_tol: float = 1e-12


def _parse_lines(text: str) -> tuple[dict[str, str], dict[str, int]]:
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: key '{key}' repeated (first on line {lines[key]})")
        values[key] = value
        lines[key] = lineno
    return values, lines


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    values, lines = _parse_lines(text)
    base = path.parent

    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    def where(key):
        return f"line {lines[key]}: " if key in lines else ""

    def get(key, conv, default=None, required=False):
        if key not in values:
            if required:
                raise ConfigError(f"missing required key '{key}'")
            return default
        try:
            return conv(values[key])
        except ValueError:
            raise ConfigError(f"{where(key)}key '{key}': cannot parse {values[key]!r}") from None

    def bad(key, why):
        return ConfigError(f"{where(key)}key '{key}': {why}")

    def as_path(v):
        return base / v

    known = set(ExperimentConfig.__dataclass_fields__) | {"lambda"}
    for key in values:
        if key not in known or key == "lam":
            raise bad(key, "unknown key")

    cfg = ExperimentConfig(
        data=values["data"],
        split=values["split"],
        network=values["network"],
        f=values["f"],
        eps=get("eps", float),
        lam=get("lambda", float),
        rho=get("rho", float),
        max_iter=get("max_iter", int),
        output=as_path(values["output"]),
        data_seed=get("data_seed", int, 0),
        split_seed=get("split_seed", int, 0),
        overlap=get("overlap", float, 0.1),
        network_seed=get("network_seed", int, 0),
        stop_tol=get("stop_tol", float, 0.0),
        probe=get("probe", int, 1),
        stride=get("stride", int, 1),
        central_max_iter=get("central_max_iter", int, 1_000_000),
        central_tol=get("central_tol", float, 1e-12),
    )

    if cfg.data == "generate":
        cfg.n = get("n", int, required=True)
        cfg.p = get("p", int, required=True)
        if cfg.n < 1 or cfg.p < 1:
            raise bad("n" if cfg.n < 1 else "p", "must be at least 1")
    elif cfg.data == "files":
        cfg.x_path = get("x_path", as_path, required=True)
        cfg.y_path = get("y_path", as_path, required=True)
    else:
        raise bad("data", "expected 'generate' or 'files'")

    if cfg.split == "file":
        cfg.mask_path = get("mask_path", as_path, required=True)
    elif cfg.split not in SCHEMES:
        raise bad("split", f"expected one of {', '.join(SCHEMES + ('file',))}")

    if cfg.network == "random-walk":
        cfg.m = get("m", int, required=True)
        if cfg.m < 2:
            raise bad("m", f"must be at least 2, got {cfg.m}")
    elif cfg.network == "file":
        cfg.network_path = get("network_path", as_path, required=True)
    else:
        raise bad("network", "expected 'random-walk' or 'file'")

    if cfg.f not in REGULARIZERS:
        raise bad("f", f"unknown regularizer {cfg.f!r}; expected one of {', '.join(sorted(REGULARIZERS))}")
    if not 0 < cfg.rho < 2:
        raise bad("rho", f"must lie in (0, 2), got {cfg.rho}")
    if not cfg.lam > 0:
        raise bad("lambda", f"must be positive, got {cfg.lam}")
    if not cfg.eps > 0:
        raise bad("eps", f"must be positive, got {cfg.eps}")
    if cfg.max_iter < 1:
        raise bad("max_iter", "must be at least 1")
    if cfg.stride < 1:
        raise bad("stride", "must be at least 1")
    if cfg.stop_tol < 0:
        raise bad("stop_tol", "must be nonnegative")
    if cfg.probe < 1 or (cfg.m is not None and cfg.probe > cfg.m):
        raise bad("probe", f"agent {cfg.probe} does not exist")
    return cfg


class InputError(RuntimeError):
    pass


def build_network_for(cfg: ExperimentConfig) -> Network:
    if cfg.network == "random-walk":
        return random_walk_network(cfg.m, cfg.network_seed)
    try:
        return load_network(cfg.network_path)
    except (OSError, TopologyError) as exc:
        raise InputError(f"network file {cfg.network_path}: {exc}") from None


def load_problem(cfg: ExperimentConfig) -> tuple[Network, GlobalData, list]:
    net = build_network_for(cfg)
    if cfg.probe > net.m:
        raise ConfigError(f"key 'probe': agent {cfg.probe} does not exist in a {net.m}-node network")
    try:
        if cfg.data == "generate":
            data = generate_data(cfg.n, cfg.p, cfg.data_seed)
        else:
            data = load_data(cfg.x_path, cfg.y_path)
        if cfg.split == "file":
            masks = masks_from_text(Path(cfg.mask_path).read_text(encoding="utf-8"), data.n, data.p, net.m)
        else:
            masks = preset_masks(cfg.split, data.n, data.p, net.m, cfg.split_seed, cfg.overlap)
        summands = split_from_masks(data, masks)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from None
    return net, data, summands


def _fmt(x) -> str:
    return repr(float(x))


def write_vector(path: Path, v: np.ndarray) -> None:
    path.write_text("".join(_fmt(x) + "\n" for x in v), encoding="utf-8")


def write_matrix(path: Path, M: np.ndarray) -> None:
    path.write_text("".join(",".join(_fmt(x) for x in row) + "\n" for row in M), encoding="utf-8")


def _central(cfg, data):
    sol = solve_central(
        data, get_regularizer(cfg.f), cfg.eps, max_iter=cfg.central_max_iter, tol=cfg.central_tol
    )
    return sol


def run_central(cfg: ExperimentConfig) -> int:
    try:
        _, data, _ = load_problem(cfg)
        sol = _central(cfg, data)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (InputError, InfeasibleConstraint) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    cfg.output.mkdir(parents=True, exist_ok=True)
    write_vector(cfg.output / "central_beta.csv", sol.beta)
    print(
        f"central: objective={sol.objective!r} residual={sol.residual!r} "
        f"iterations={sol.iterations} converged={sol.converged}"
    )
    return EXIT_OK if sol.converged else EXIT_CENTRAL


def run_experiment(cfg: ExperimentConfig) -> int:
    """Generate or load data, solve centrally, simulate, write outputs."""
    try:
        net, data, summands = load_problem(cfg)
        sol = _central(cfg, data)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (InputError, InfeasibleConstraint) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    if not sol.converged:
        log.error("central solver did not converge in %d iterations", sol.iterations)
        return EXIT_CENTRAL

    f = get_regularizer(cfg.f)
    res = simulate(
        net, summands, f, cfg.eps, cfg.lam, cfg.rho, cfg.max_iter, sol,
        probe_agent=cfg.probe, stop_tol=cfg.stop_tol, data=data,
    )
    report = audit_ledger(res.ledger, net, dim=data.n + data.p)

    out = cfg.output
    out.mkdir(parents=True, exist_ok=True)
    res.trace.to_csv(out / "trace.csv", stride=cfg.stride)
    write_matrix(out / "agents_beta.csv", res.betas)
    write_vector(out / "central_beta.csv", sol.beta)
    (out / "ledger.txt").write_text(ledger_to_text(res.ledger, net), encoding="utf-8")
    summary = (
        f"final_rel_error={res.trace.rel_error[-1]!r} iterations={res.iterations} "
        f"messages={res.messages} consensus_gap={res.trace.consensus_gap[-1]!r} "
        f"feasibility_gap={res.trace.feasibility_gap[-1]!r} audit={'ok' if report.ok else 'FAILED'}"
    )
    (out / "summary.txt").write_text(summary + "\n", encoding="utf-8")
    print(summary)
    return EXIT_OK


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return run_experiment(cfg)


def _cmd_central(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return run_central(cfg)


def _cmd_gen_network(args) -> int:
    try:
        net = random_walk_network(args.m, args.seed)
    except TopologyError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    sys.stdout.write(net.to_text())
    return EXIT_OK


def _cmd_audit(args) -> int:
    try:
        ledger, net = ledger_from_text(Path(args.ledger).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    report = audit_ledger(ledger, net)
    for v in report.violations:
        print(v)
    print(report.summary())
    return EXIT_OK if report.ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="netdr", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a full experiment from a config file")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("central", help="solve the centralized problem only")
    p.add_argument("config")
    p.set_defaults(func=_cmd_central)

    p = sub.add_parser("gen-network", help="print a random-walk network")
    p.add_argument("m", type=int)
    p.add_argument("seed", type=int)
    p.set_defaults(func=_cmd_gen_network)

    p = sub.add_parser("audit", help="audit a message ledger file")
    p.add_argument("ledger")
    p.set_defaults(func=_cmd_audit)

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="netdr: %(levelname)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
