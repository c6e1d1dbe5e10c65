"""oamnet command line: plan, simulate, sweep, protocol.

Exit codes: 0 success, 1 simulation check failed, 2 config or usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import config as cfg
from . import fabric, planner, protocols

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class OutputExists(Exception):
    pass


class Output:
    def __init__(self, directory, force: bool):
        self.dir = Path(directory)
        self.force = force

    def write(self, name: str, text: str) -> Path:
        path = self.dir / name
        if path.exists() and not self.force:
            raise OutputExists(f"{path} exists; pass --force to overwrite")
        self.dir.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        return path


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def cmd_plan(conf: cfg.Config, out: Output, verbose: int = 0) -> int:
    spec = conf.spec
    arch, dims = spec.architecture, spec.dims
    if arch != "ent-passive":
        table = planner.assignment_table(arch, **dims)
        print(f"OAM assignment ({arch}, band {table.band}):")
        print(table.grid())
        out.write("plan.csv", table.to_csv())
    else:
        print("ent-passive: OAM values are assigned at random by the source (no table)")
    try:
        row, rdims = planner.resource_row(arch, dims)
        parts = planner.resource_plan(row, **rdims)
        print(f"resources ({row}): " + "; ".join(str(c) for c in parts))
    except ValueError:
        counts = fabric.build(spec).component_counts()
        print("resources (from build): " + "; ".join(f"{v}x {k}" for k, v in sorted(counts.items())))
    return EXIT_OK


def _format_matrix(report: fabric.RoutingReport) -> str:
    m = report.matrix()
    ss, rs = report.senders, report.receivers
    names = [fabric._fmt_port(r) for r in rs]
    lines = ["sender\\receiver " + " ".join(f"{n:>8}" for n in names)]
    for s, row in zip(ss, m):
        cells = ["       -" if math.isnan(v) else f"{v:8.6f}" for v in row]
        lines.append(f"{fabric._fmt_port(s):>15} " + " ".join(cells))
    return "\n".join(lines)


def cmd_simulate(conf: cfg.Config, out: Output, verbose: int = 0) -> int:
    opts = conf.simulate
    report = fabric.verify_all_pairs(conf.spec, include_self=opts.get("include_self", False),
                                     reverse=opts.get("reverse", False))
    print(_format_matrix(report))
    print(f"min probability {report.min_probability:.12f}")
    out.write("routing.csv", report.to_csv())
    if conf.spec.noise:
        threshold = opts.get("min_prob", 0.96)
        _warn(f"noisy sorters configured; routing is not ideal (min {report.min_probability:.6f})")
        return EXIT_OK if report.min_probability >= threshold else EXIT_FAIL
    return EXIT_OK if report.ok(1e-9) else EXIT_FAIL


def cmd_sweep(conf: cfg.Config, out: Output, verbose: int = 0) -> int:
    if conf.sweep is None:
        raise cfg.ConfigError("sweep command needs a 'sweep' section")
    points = fabric.noise_sweep(conf.spec.with_noise(None), conf.sweep["magnitudes"],
                                samples=conf.sweep.get("samples", 100), seed=conf.seed,
                                workers=conf.sweep.get("workers", 1),
                                sorters=conf.sweep.get("sorters"))
    text = fabric.sweep_to_csv(points)
    print(text, end="")
    out.write("sweep.csv", text)
    return EXIT_OK


def cmd_protocol(conf: cfg.Config, out: Output, verbose: int = 0) -> int:
    proto = conf.protocol
    if proto is None:
        raise cfg.ConfigError("protocol command needs a 'protocol' section")
    arch = conf.spec.architecture
    kind = proto["type"]
    if kind == "bbm92":
        if arch not in ("ent-active", "ent-passive"):
            raise cfg.ConfigError(f"bbm92 needs an entanglement architecture, not {arch}")
        kind = "active" if arch == "ent-active" else "passive"
    if kind == "bb84":
        if arch in ("ent-passive",):
            raise cfg.ConfigError("bb84 needs a prepare-and-measure architecture")
        c = protocols.BB84Config(conf.spec, proto.get("sender", 0), proto.get("receiver", 0),
                                 proto.get("bits", 10_000), proto.get("bit_seed", conf.seed),
                                 proto.get("basis_seed", conf.seed + 1))
        try:
            report = protocols.bb84_run(c)
        except protocols.ProtocolError as exc:
            raise cfg.ConfigError(str(exc)) from exc
        print(f"bb84 label={report.label} {report.summary()}")
        out.write("key.csv", report.to_csv())
        return EXIT_OK if conf.spec.noise or report.qber == 0.0 else EXIT_FAIL
    if kind == "active":
        if arch != "ent-active":
            raise cfg.ConfigError(f"active distribution needs architecture ent-active, not {arch}")
        pair = tuple(proto.get("pair", (0, 1)))
        try:
            res = protocols.active_distribute(conf.spec, pair)
        except protocols.ProtocolError as exc:
            raise cfg.ConfigError(str(exc)) from exc
        print(f"Bell fidelity {res.bell_fidelity:.1f}, ports ({pair[0]},{pair[1]}), "
              f"arrival probability {res.arrival_probability:.12f}")
        ports = {rx: p for p, rx in fabric.build(conf.spec).outputs.items()}
        key = protocols.bbm92_run(res.state, proto.get("rounds", 1000), conf.seed,
                                  {("path", 0): ports[pair[0]], ("path", 1): ports[pair[1]]})
        print(f"bbm92 {key.summary()}")
        out.write("key.csv", key.to_csv())
        return EXIT_OK if abs(res.bell_fidelity - 1) < 1e-9 and key.qber == 0.0 else EXIT_FAIL
    if arch != "ent-passive":
        raise cfg.ConfigError(f"passive distribution needs architecture ent-passive, not {arch}")
    d = conf.spec.dims["d"]
    state = protocols.passive_distribute_state(d, polarization=True, noise=conf.spec.noise)
    hist = protocols.coincidences(state, proto.get("samples", 1000), conf.seed)
    print("signal idler probability")
    for (i, j), p in sorted(hist.probabilities.items()):
        print(f"{i:>6} {j:>5} {p:.12f}")
    print(f"distinct-port fraction {hist.distinct_fraction:.6f} "
          f"(sampled {hist.sampled_distinct_fraction:.6f}); pairs {hist.user_pairs()}")
    out.write("coincidences.csv", hist.to_csv())
    if "rounds" in proto:
        key = protocols.bbm92_run(state, proto["rounds"], conf.seed, {("path", 0): 0, ("path", 1): 1})
        print(f"bbm92 (paths 0,1) {key.summary()}")
        out.write("key.csv", key.to_csv())
        return EXIT_OK if conf.spec.noise or key.qber == 0.0 else EXIT_FAIL
    return EXIT_OK


COMMANDS = {"plan": cmd_plan, "simulate": cmd_simulate, "sweep": cmd_sweep, "protocol": cmd_protocol}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oamnet", description="OAM-routed quantum network planner and simulator")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="YAML/JSON network config")
    parser.add_argument("--out", default="oamnet-out", help="directory for CSV outputs")
    parser.add_argument("--seed", type=int, default=None,
                        help=f"overrides the config seed (default {cfg.DEFAULT_SEED})")
    parser.add_argument("--force", action="store_true", help="overwrite existing outputs")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        conf = cfg.load(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise cfg.ConfigError("--seed must be non-negative")
            conf.seed = args.seed
        return COMMANDS[args.command](conf, Output(args.out, args.force), args.verbose)
    except (cfg.ConfigError, OutputExists) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except fabric.SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
