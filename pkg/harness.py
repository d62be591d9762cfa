"""
Command line for resknap.

    python harness.py simulate --input items.txt --mode value --alpha 0.1
    python harness.py solve --input items.txt
    python harness.py adversary --family size --policy pack-first-fit --C 1e6 --beta 10
    python harness.py bounds-curve --output curve.csv
    python harness.py verify --mode value --alpha 0.1 --n 1000
    python harness.py sweep --grid 0.05:0.45:0.05 --output sweep.csv

Reports are ``key=value`` lines on stdout (and in ``--output`` when given);
curves and sweeps are CSV. Exit codes are listed in ``error_handlers``.
"""

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import List, Optional, Tuple
import argparse
import logging
import math
import sys

import bounds
import config as config_module
from adversaries import SizeAdversaryConfig, ValueAdversaryConfig, play
from app_setup import configure_logging, run_batch
from error_handlers import EXIT_OK, EXIT_VIOLATION, HANDLED_ERRORS, handle_error
from instance_generator import random_batch, unit_density_batch
from memory_manager import batch_memory
from models import (
    ConfigError,
    CostKind,
    INFINITE,
    Instance,
    Mode,
    ONE,
    ZERO,
    parse_instance,
    ratio,
    to_rat,
)
from offline_solver import fractional_bound, optimal_packing
from policies import PolicyConfig, PolicyKind, run
from report_utils import (
    format_float,
    format_items,
    format_rat,
    report_text,
    rows_to_csv,
    write_text,
)

COMMANDS = ("simulate", "solve", "adversary", "bounds-curve", "verify", "sweep")
FROM_LEDGER = "from-ledger"
DEFAULT_SWEEP_GRID = "0.05:0.45:0.05"
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class RunSpec:
    """Fully resolved options of one command."""

    command: str
    mode: CostKind = CostKind.VALUE
    alpha: Fraction = Fraction(1, 10)
    c: Optional[Fraction] = None
    beta: Optional[Fraction] = Fraction(10)
    seed: int = 12345
    input: Optional[str] = None
    output: Optional[str] = None
    policy: PolicyKind = PolicyKind.ALG2
    family: str = "value"
    epsilon: Fraction = HALF
    delta: Fraction = Fraction(1, 10)
    instances: int = 200
    max_items: int = 50
    workers: int = 1
    density_low_factor: Fraction = Fraction(1, 4)
    density_high_factor: Fraction = Fraction(8)
    rounds: int = 25
    eps2: Fraction = Fraction(1, 20)
    eps3: Fraction = ZERO
    size_C: Fraction = Fraction(10**6)
    size_epsilon: Fraction = Fraction(1, 100)
    grid: Tuple[Fraction, ...] = ()
    toward_optimal_factor: bool = False

    @property
    def beta_from_ledger(self) -> bool:
        return self.beta is None

    @property
    def resolved_c(self) -> Fraction:
        """Threshold factor: explicit ``c``, else c_star for value mode, 1 + epsilon/2 for size verify, else 1 + delta."""
        if self.c is not None:
            return self.c
        if self.mode is CostKind.VALUE:
            return max(ONE, bounds.rat_floor(bounds.c_star(float(self.alpha))))
        if self.command == "verify":
            return 1 + self.epsilon / 2
        return 1 + self.delta

    def policy_config(self) -> PolicyConfig:
        return PolicyConfig(Mode(self.mode, self.alpha), self.resolved_c, self.policy)


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit 3), not argparse's exit 2."""

    def error(self, message):
        raise ConfigError(message)


def _rat(text):
    try:
        return to_rat(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", help="configuration file (default config.json)")
    common.add_argument("--mode", choices=("size", "value"))
    common.add_argument("--alpha", type=_rat)
    common.add_argument("--c", dest="c", type=_rat, help="threshold factor")
    common.add_argument("--beta", help=f"additive constant, or '{FROM_LEDGER}' in size-mode verify")
    common.add_argument("--seed", type=int)
    common.add_argument("--input", help="instance file")
    common.add_argument("--output", help="report or CSV destination")
    common.add_argument("--policy", choices=[kind.value for kind in PolicyKind])
    common.add_argument("--family", choices=("size", "value"))
    common.add_argument("--epsilon", type=_rat)
    common.add_argument("--delta", type=_rat)
    common.add_argument("--n", dest="instances", type=int, help="number of random instances")
    common.add_argument("--max-items", dest="max_items", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--N", dest="rounds", type=int, help="value adversary patience N")
    common.add_argument("--eps2", type=_rat)
    common.add_argument("--eps3", type=_rat)
    common.add_argument("--C", dest="size_C", type=_rat, help="value of the size adversary's items")
    common.add_argument("--size-epsilon", dest="size_epsilon", type=_rat)
    common.add_argument("--grid", help="alpha grid as start:stop:step")
    common.add_argument("--toward-optimal-factor", dest="toward_optimal_factor", action="store_true")
    common.add_argument("--log-level", dest="log_level")
    common.add_argument("--log-file", dest="log_file")

    parser = _Parser(prog="resknap", description="Online knapsack with reservation costs", allow_abbrev=False)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], allow_abbrev=False)
    return parser


def parse_grid(text: str) -> Tuple[Fraction, ...]:
    """``start:stop:step`` with both ends included."""
    try:
        start, stop, step = (to_rat(part) for part in text.split(":"))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"grid must be start:stop:step, got {text!r}")
    if step <= 0 or stop < start:
        raise ConfigError(f"empty alpha grid {text!r}")
    points = []
    alpha = start
    while alpha <= stop:
        points.append(alpha)
        alpha += step
    return tuple(points)


def _pick(flag, key, cfg):
    return flag if flag is not None else cfg.get(key, config_module.DEFAULT_CONFIG[key])


def _resolve_beta(text) -> Optional[Fraction]:
    if text == FROM_LEDGER:
        return None
    try:
        beta = to_rat(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"beta must be a number or '{FROM_LEDGER}', got {text!r}")
    if beta < 0:
        raise ConfigError(f"beta must be non-negative, got {beta}")
    return beta


def build_run_spec(args, cfg) -> RunSpec:
    """Resolve every option as flag, then configuration file, then built-in default."""
    command = args.command
    family = args.family or "value"
    if command == "adversary" and args.mode is None:
        mode = CostKind(family)
    else:
        mode = CostKind(_pick(args.mode, "mode", cfg))

    if args.policy is not None:
        policy = PolicyKind(args.policy)
    else:
        policy = PolicyKind(cfg.get("policy", "alg2"))
        if policy in (PolicyKind.ALG1, PolicyKind.ALG2):
            policy = PolicyKind.ALG1 if mode is CostKind.SIZE else PolicyKind.ALG2
    if command == "verify":
        policy = PolicyKind.ALG1 if mode is CostKind.SIZE else PolicyKind.ALG2
    if command == "sweep":
        mode, policy = CostKind.VALUE, PolicyKind.ALG2

    c = args.c if args.c is not None else cfg.get("c")
    spec = RunSpec(
        command=command,
        mode=mode,
        alpha=to_rat(_pick(args.alpha, "alpha", cfg)),
        c=to_rat(c) if c is not None else None,
        beta=_resolve_beta(_pick(args.beta, "beta", cfg)),
        seed=config_module.get_seed(args.seed),
        input=args.input,
        output=args.output,
        policy=policy,
        family=family,
        epsilon=to_rat(_pick(args.epsilon, "epsilon", cfg)),
        delta=to_rat(_pick(args.delta, "delta", cfg)),
        instances=int(_pick(args.instances, "instances", cfg)),
        max_items=int(_pick(args.max_items, "max_items", cfg)),
        workers=int(_pick(args.workers, "workers", cfg)),
        density_low_factor=to_rat(cfg.get("density_low_factor", 0.25)),
        density_high_factor=to_rat(cfg.get("density_high_factor", 8)),
        rounds=int(_pick(args.rounds, "adversary_n", cfg)),
        eps2=to_rat(_pick(args.eps2, "adversary_eps2", cfg)),
        eps3=to_rat(_pick(args.eps3, "adversary_eps3", cfg)),
        size_C=to_rat(_pick(args.size_C, "size_adversary_C", cfg)),
        size_epsilon=to_rat(_pick(args.size_epsilon, "size_adversary_epsilon", cfg)),
        grid=parse_grid(args.grid) if args.grid else (),
        toward_optimal_factor=args.toward_optimal_factor,
    )
    if command == "sweep" and not spec.grid:
        spec = replace(spec, grid=parse_grid(DEFAULT_SWEEP_GRID))
    validate_run_spec(spec)
    return spec


def validate_run_spec(spec: RunSpec) -> None:
    """Reject option combinations that a command cannot run."""
    if spec.alpha < 0:
        raise ConfigError("alpha must be non-negative")
    if spec.instances < 1 or spec.max_items < 1 or spec.workers < 1 or spec.rounds < 1:
        raise ConfigError("--n, --max-items, --workers and --N must be at least 1")
    if spec.command in ("simulate", "solve") and not spec.input:
        raise ConfigError(f"{spec.command} needs --input")
    if spec.beta_from_ledger and not (spec.command in ("simulate", "verify") and spec.mode is CostKind.SIZE):
        raise ConfigError(f"--beta {FROM_LEDGER} is only meaningful for size-mode simulate and verify")
    if spec.policy is PolicyKind.ALG1 and spec.alpha <= 0:
        raise ConfigError("alg1 needs alpha > 0; with alpha = 0 no policy is competitive")
    if spec.command == "verify":
        if spec.mode is CostKind.VALUE and not 0 < spec.alpha < HALF:
            raise ConfigError("value-mode guarantees need 0 < alpha < 1/2; nothing is competitive beyond 1/2")
        if spec.mode is CostKind.SIZE and spec.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if spec.mode is CostKind.SIZE and spec.resolved_c > 1 + spec.epsilon / 2:
            raise ConfigError(f"size-mode verify needs c <= 1 + epsilon/2, got c={spec.resolved_c}")
    if spec.command == "sweep" and not all(0 < alpha < HALF for alpha in spec.grid):
        raise ConfigError("sweep grid must lie inside (0, 1/2)")
    if spec.command == "adversary" and spec.family == "value" and spec.alpha >= HALF:
        raise ConfigError("the value adversary needs alpha < 1/2")
    if spec.command not in ("bounds-curve", "solve", "sweep"):
        spec.policy_config()


def _read_instance(path: str) -> Instance:
    with open(path, "rb") as f:
        data = f.read()
    return parse_instance(data)


def _emit(spec: RunSpec, text: str) -> None:
    sys.stdout.write(text)
    if spec.output:
        write_text(spec.output, text)


def _ledger_beta(alpha: Fraction, epsilon: Fraction, density_level: int) -> Fraction:
    """Additive constant the size-mode guarantee needs for a run with the given density level."""
    return (2 + epsilon) * 2 * alpha * (density_level + 1) + 2 * alpha


def cmd_simulate(spec: RunSpec) -> int:
    instance = _read_instance(spec.input)
    config = spec.policy_config()
    trace = run(config, instance)
    opt = optimal_packing(instance.items, ONE)
    net = trace.report.net_gain
    ledger = trace.ledger
    if spec.beta_from_ledger:
        beta = _ledger_beta(spec.alpha, spec.epsilon, ledger.density_level)
    else:
        beta = spec.beta
    pairs = [
        ("command", "simulate"),
        ("policy", spec.policy.value),
        ("mode", spec.mode.value),
        ("alpha", format_rat(spec.alpha)),
        ("c", format_rat(config.c)),
        ("beta", format_rat(beta)),
        ("items", len(instance.items)),
        ("decisions", ",".join(decision.value for decision in trace.decision_list)),
        ("reserved", format_items(trace.reserved)),
        ("packed_online", format_items(trace.packed_online)),
        ("final_packing", format_items(trace.final_packing)),
        ("packed_value", format_rat(trace.report.packed_value)),
        ("reservation_cost", format_rat(trace.report.reservation_cost)),
        ("net_gain", format_rat(net)),
        ("opt_value", format_rat(opt.total_value)),
        ("opt_packing", format_items(opt.chosen)),
        ("strict_ratio", format_rat(ratio(opt.total_value, net, ZERO))),
        ("nonstrict_ratio", format_rat(ratio(opt.total_value, net, beta))),
        ("epoch_count", ledger.epoch_count),
        ("density_level", ledger.density_level),
        ("v_c", format_rat(ledger.v_c)),
        ("s_c", format_rat(ledger.s_c)),
        ("d_delta_final", format_rat(ledger.d_delta_final)),
    ]
    _emit(spec, report_text(pairs))
    return EXIT_OK


def cmd_solve(spec: RunSpec) -> int:
    instance = _read_instance(spec.input)
    opt = optimal_packing(instance.items, ONE)
    pairs = [
        ("command", "solve"),
        ("items", len(instance.items)),
        ("chosen", format_items(opt.chosen)),
        ("total_value", format_rat(opt.total_value)),
        ("total_size", format_rat(opt.total_size)),
        ("fractional_bound", format_rat(fractional_bound(instance.items, ONE))),
    ]
    _emit(spec, report_text(pairs))
    return EXIT_OK


def value_adversary_config(spec: RunSpec, alpha: Fraction) -> ValueAdversaryConfig:
    return ValueAdversaryConfig.for_alpha(
        alpha,
        n=spec.rounds,
        eps2=spec.eps2,
        eps3=spec.eps3,
        toward_optimal_factor=spec.toward_optimal_factor,
    )


def cmd_adversary(spec: RunSpec) -> int:
    policy_config = spec.policy_config()
    if spec.family == "size":
        beta = spec.beta if spec.beta is not None else Fraction(10)
        adversary_config = SizeAdversaryConfig(epsilon=spec.size_epsilon, C=spec.size_C, beta=beta)
    else:
        adversary_config = value_adversary_config(spec, spec.alpha)
    result = play(adversary_config, policy_config)

    pairs = [
        ("command", "adversary"),
        ("family", spec.family),
        ("policy", spec.policy.value),
        ("alpha", format_rat(spec.alpha)),
        ("c", format_rat(policy_config.c)),
        ("beta", format_rat(result.beta)),
        ("termination", result.termination.value),
        ("items_emitted", result.items_emitted),
        ("opt_value", format_rat(result.opt_value)),
        ("net_gain", format_rat(result.trace.report.net_gain)),
        ("forced_ratio", format_rat(result.forced_ratio)),
        ("forced_ratio_float", format_float(result.forced_ratio)),
    ]
    if spec.family == "value":
        alpha = float(spec.alpha)
        pairs += [
            ("N", adversary_config.N),
            ("eps2", format_rat(adversary_config.eps2)),
            ("rejected_round", "" if result.rejected_round is None else result.rejected_round),
            ("lb", format_float(bounds.lb_value(alpha))),
        ]
        if result.factor_at_rejection is not None:
            f_k = float(result.factor_at_rejection)
            pairs += [
                ("factor_at_rejection", format_float(f_k)),
                ("tail_ratio", format_float(result.tail_ratio)),
                ("finite_n_bound", format_float(
                    bounds.finite_n_bound(alpha, f_k, float(result.tail_ratio), adversary_config.N)
                )),
                ("series_bound", format_float(bounds.series_bound(alpha, f_k, float(adversary_config.eps3)))),
            ]
        if spec.policy is PolicyKind.ALG2:
            pairs.append(("ub", format_float(bounds.ub_value(alpha, float(policy_config.c)))))
    _emit(spec, report_text(pairs))
    return EXIT_OK


def bounds_curve_csv(family: str = "value") -> str:
    if family == "size":
        rows = []
        for alpha in bounds.ALPHA_GRID:
            lb, ub = bounds.size_bounds(alpha)
            rows.append([format_float(alpha), format_float(lb), format_float(ub)])
        return rows_to_csv(["alpha", "lb", "ub"], rows)
    rows = [
        [format_float(point.alpha), format_float(point.lb), format_float(point.ub_opt),
         format_float(point.c_star), format_float(point.f_star)]
        for point in bounds.bound_curve()
    ]
    return rows_to_csv(["alpha", "lb", "ub_opt", "c_star", "f_star"], rows)


def _emit_csv(spec: RunSpec, text: str) -> None:
    if spec.output:
        write_text(spec.output, text)
        logging.info(f"Wrote {spec.output}")
    else:
        sys.stdout.write(text)


def cmd_bounds_curve(spec: RunSpec) -> int:
    _emit_csv(spec, bounds_curve_csv(spec.family))
    return EXIT_OK


def check_instance(task) -> Tuple[bool, str, str]:
    """
    Run one verify task and check the guarantees that apply to its mode.

    Tasks are plain tuples of strings so they cross process boundaries as-is.
    Returns ``(ok, strict_ratio, problems)``.
    """
    kind, alpha, c, policy, bound, beta, epsilon, text = task
    alpha, c, epsilon = Fraction(alpha), Fraction(c), Fraction(epsilon)
    instance = parse_instance(text)
    trace = run(PolicyConfig(Mode(CostKind(kind), alpha), c, PolicyKind(policy)), instance)
    opt = optimal_packing(instance.items, ONE).total_value
    net = trace.report.net_gain
    ledger = trace.ledger
    problems = []

    if kind == CostKind.VALUE.value:
        if bound and opt > Fraction(bound) * net:
            problems.append(f"opt {opt} exceeds ub*net {Fraction(bound) * net}")
        if c > 1:
            if ledger.evicted_cost > ledger.evicted_cost_ceiling(alpha, c):
                problems.append("evicted reservation cost above its geometric ceiling")
            for epoch in ledger.epochs:
                if epoch.evicted_size >= 3 or epoch.peak_evicted_density > c * epoch.marker:
                    problems.append(f"epoch at marker {epoch.marker} evicted too much")
    else:
        floor = ledger.size_mode_floor(alpha)
        if net < floor:
            problems.append(f"net gain {net} below ledger floor {floor}")
        if ledger.pool_full and ledger.epoch_count > ledger.density_level - 1:
            problems.append(f"{ledger.epoch_count} epochs at density level {ledger.density_level}")
        beta_value = Fraction(beta) if beta else _ledger_beta(alpha, epsilon, ledger.density_level)
        if opt > (2 + epsilon) * net + beta_value:
            problems.append(f"opt {opt} exceeds (2+eps)*net+beta {(2 + epsilon) * net + beta_value}")

    return not problems, format_rat(ratio(opt, net, ZERO)), "; ".join(problems)


def _ratio_key(text: str) -> Fraction:
    return Fraction(10**100) if text == "inf" else Fraction(text)


def cmd_verify(spec: RunSpec) -> int:
    config = spec.policy_config()
    alpha_float = float(spec.alpha)
    if spec.mode is CostKind.VALUE:
        ub = bounds.ub_value(alpha_float, float(config.c))
        bound = bounds.round_up_relative(ub) if math.isfinite(ub) else None
    else:
        bound = None

    batch = random_batch(
        spec.seed,
        spec.instances,
        spec.max_items,
        spec.alpha,
        config.c,
        spec.density_low_factor,
        spec.density_high_factor,
    )
    batch += unit_density_batch(spec.seed + 1, max(1, spec.instances // 10), spec.max_items)
    tasks = [
        (
            spec.mode.value,
            str(spec.alpha),
            str(config.c),
            config.policy_kind.value,
            str(bound) if bound is not None else "",
            str(spec.beta) if spec.beta is not None else "",
            str(spec.epsilon),
            instance.to_text(),
        )
        for instance in batch
    ]
    logging.info(f"Verifying {len(tasks)} instances in {spec.mode.value} mode at alpha={spec.alpha}")
    with batch_memory("verify"):
        results = run_batch(check_instance, tasks, spec.workers)

    violations = [(instance, problem) for instance, (ok, _, problem) in zip(batch, results) if not ok]
    worst = max((strict for _, strict, _ in results), key=_ratio_key, default="0")

    pairs = [
        ("command", "verify"),
        ("mode", spec.mode.value),
        ("policy", config.policy_kind.value),
        ("alpha", format_rat(spec.alpha)),
        ("c", format_rat(config.c)),
        ("seed", spec.seed),
        ("checked", len(tasks)),
        ("worst_strict_ratio", worst),
    ]
    if spec.mode is CostKind.VALUE:
        pairs.append(("ub", format_float(ub)))
        if bound is not None:
            game = play(value_adversary_config(spec, spec.alpha), config)
            pairs += [
                ("game_termination", game.termination.value),
                ("game_forced_ratio", format_rat(game.forced_ratio)),
                ("game_forced_ratio_float", format_float(game.forced_ratio)),
            ]
            if game.forced_ratio == INFINITE or game.forced_ratio > bound:
                violations.append((None, f"value adversary forced {format_rat(game.forced_ratio)} above ub"))
    else:
        pairs += [
            ("epsilon", format_rat(spec.epsilon)),
            ("beta", FROM_LEDGER if spec.beta_from_ledger else format_rat(spec.beta)),
        ]
    pairs.append(("violations", len(violations)))

    text = report_text(pairs)
    if violations:
        instance, problem = violations[0]
        logging.error(f"Guarantee violated: {problem}")
        text += f"# counterexample: {problem}\n"
        if instance is not None:
            text += instance.to_text()
    _emit(spec, text)
    return EXIT_VIOLATION if violations else EXIT_OK


def sweep_row(task) -> List[str]:
    """One CSV row of the sweep: measured worst ratio and adversary ratio at one alpha."""
    alpha_text, seed, instances, max_items, low, high, rounds, eps2 = task
    alpha = Fraction(alpha_text)
    c = max(ONE, bounds.rat_floor(bounds.c_star(float(alpha))))
    config = PolicyConfig(Mode.value(alpha), c, PolicyKind.ALG2)

    batch = random_batch(seed, instances, max_items, alpha, c, Fraction(low), Fraction(high))
    batch += unit_density_batch(seed + 1, max(1, instances // 10), max_items)

    worst = ZERO
    for instance in batch:
        trace = run(config, instance)
        opt = optimal_packing(instance.items, ONE).total_value
        worst = max(worst, ratio(opt, trace.report.net_gain, ZERO))

    game = play(ValueAdversaryConfig.for_alpha(alpha, n=rounds, eps2=Fraction(eps2)), config)
    alpha_float = float(alpha)
    return [
        format_float(alpha_float),
        format_float(worst),
        format_float(game.forced_ratio),
        format_float(bounds.lb_value(alpha_float)),
        format_float(bounds.ub_value(alpha_float, float(c))),
    ]


def cmd_sweep(spec: RunSpec) -> int:
    tasks = [
        (
            str(alpha),
            spec.seed,
            spec.instances,
            spec.max_items,
            str(spec.density_low_factor),
            str(spec.density_high_factor),
            spec.rounds,
            str(spec.eps2),
        )
        for alpha in spec.grid
    ]
    logging.info(f"Sweeping {len(tasks)} alpha values with {spec.instances} instances each")
    with batch_memory("sweep"):
        rows = run_batch(sweep_row, tasks, spec.workers)
    _emit_csv(spec, rows_to_csv(["alpha", "measured_worst", "adversary_forced", "lb", "ub"], rows))
    return EXIT_OK


COMMAND_HANDLERS = {
    "simulate": cmd_simulate,
    "solve": cmd_solve,
    "adversary": cmd_adversary,
    "bounds-curve": cmd_bounds_curve,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            config_module.use_config_file(args.config)
        cfg = config_module.load_config()
        configure_logging(args.log_file or cfg.get("log_file"), args.log_level)
        spec = build_run_spec(args, cfg)
        return COMMAND_HANDLERS[spec.command](spec)
    except HANDLED_ERRORS as e:
        return handle_error(e)


if __name__ == "__main__":
    sys.exit(main())
