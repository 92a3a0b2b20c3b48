"""
Command-line entry point.

    negotiation-utilities run --kind SellerBuyer --agent1 split_difference --agent2 split_difference
    negotiation-utilities tournament --config tournament.json
    negotiation-utilities experiment acceptance_curve --params '{"trials": 20}'
    negotiation-utilities replay game.json
    negotiation-utilities counterfactual game.json --turn 0 --message @edit.txt --out edited.json
    negotiation-utilities analyze tournament/

Exit codes: 0 success, 1 configuration error, 2 partial failure (some
games aborted, or a replay that does not reproduce its record), 3
backend unreachable.

API keys are read from the environment variable named in each agent
spec (api_key_env, default OPENAI_API_KEY). They are never flags.
"""
from __future__ import annotations
import os, sys, json, logging, argparse
from typing import Union
from .agents import AgentSpec, STRATEGIES, make_agent
from .analysis import format_value
from .engine import run
from .negotiation_exceptions import (
    NegotiationError, ConfigError, InvalidOverride, UnknownExperiment,
    MissingParam, UnknownStrategy, UnknownBehavior, InvalidEdit,
    PartialFailure, PersistenceError, ProtocolError
)
from .parameters import (
    RED, BLUE, SCENARIO_KINDS, CONFIG_FORMAT_VERSION, DEFAULT_GAMES_PER_PAIR, debug_mode
)
from .persistence import save, load, counterfactual_rerun
from .protocol import parse_message
from .scenarios import load_config_file, config_from_file_content, ULTIMATUM_VARIANTS
from .experiments import run_experiment, EXPERIMENTS
from .tournament import TournamentPlan, run_tournament, analyze_directory
from .plots import plot_tournament

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_CONFIG_ERROR = 1
EXIT_PARTIAL_FAILURE = 2
EXIT_BACKEND_UNREACHABLE = 3

def _read_json_argument(value: str, what: str):
    """
    A JSON document given inline or as a path to a JSON file.
    """
    if os.path.isfile(value):
        try:
            with open(value, "r") as infile:
                return json.load(infile)
        except (OSError, json.JSONDecodeError) as err:
            msg = f"Could not read {what} file '{value}': {err}"
            raise ConfigError(msg) from err

    try:
        return json.loads(value)
    except json.JSONDecodeError as err:
        msg = f"{what} must be JSON or a path to a JSON file. Got '{value}'."
        raise ConfigError(msg) from err

def parse_agent(value: str) -> AgentSpec:
    """
    An agent given as a strategy name ('split_difference'), as
    'id:strategy', as a JSON object or as a path to a JSON file.
    """
    strategy = value.split(":", 1)[-1]
    if strategy in STRATEGIES:
        agent_id = value.split(":", 1)[0] if ":" in value else value
        return AgentSpec(id=agent_id, strategy=strategy)

    content = _read_json_argument(value, "Agent spec")
    if not isinstance(content, dict):
        msg = f"Agent spec must be a JSON object. Got {content!r}."
        raise ConfigError(msg)

    try:
        return AgentSpec.from_dict(content)
    except ValueError as err:
        raise ConfigError(str(err)) from err

def _parse_override(value: str) -> tuple[str, object]:
    if "=" not in value:
        msg = f"Overrides are given as KEY=VALUE. Got '{value}'."
        raise ConfigError(msg)

    key, raw = value.split("=", 1)
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw

def _config_content(args) -> dict:
    """
    Config file content with explicit flags applied on top.
    """
    if args.config is not None:
        content = load_config_file(args.config)
    else:
        if args.kind is None:
            msg = "Give a scenario with --kind or --config."
            raise ConfigError(msg)

        content = {
            "format_version": CONFIG_FORMAT_VERSION, "kind": args.kind, "overrides": {},
            "variant": None, "behaviors": {}, "agents": [], "num_games": None,
            "seed": 0, "out_dir": None, "parallel": None,
        }

    if args.kind is not None:
        content["kind"] = args.kind

    for value in args.override or []:
        key, parsed = _parse_override(value)
        content["overrides"][key] = parsed

    if args.variant is not None:
        content["variant"] = args.variant

    for value in args.behavior or []:
        player, behavior = _parse_override(value)
        content["behaviors"][player.upper()] = None if behavior in ("none", None) else behavior

    if args.seed is not None:
        content["seed"] = args.seed

    return content

def _add_scenario_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=str, default=None, help="JSON config file")
    parser.add_argument("--kind", type=str, default=None, choices=SCENARIO_KINDS)
    parser.add_argument(
        "--override", type=str, action="append",
        help="scenario override KEY=VALUE, VALUE as JSON; repeatable",
    )
    parser.add_argument("--variant", type=str, default=None, choices=("default",) + ULTIMATUM_VARIANTS)
    parser.add_argument(
        "--behavior", type=str, action="append",
        help="behavior prompt PLAYER=cunning|desperate|none; repeatable",
    )
    parser.add_argument("--seed", type=int, default=None)

def _print_outcome(record):
    outcome = record.outcome
    print(f"{record.config.kind}: {outcome.status.value} after {len(record.transcript)} messages")
    print(f"payoffs: RED {format_value(outcome.payoffs[RED])}, BLUE {format_value(outcome.payoffs[BLUE])}")
    print(f"winner: {outcome.winner}")
    if record.abort_reason is not None:
        print(f"aborted: {record.abort_reason}")

def _exit_code_for_aborted(reasons: list[str]) -> int:
    if reasons and all(reason.startswith("BackendTimeout") for reason in reasons):
        return EXIT_BACKEND_UNREACHABLE

    return EXIT_PARTIAL_FAILURE

def command_run(args) -> int:
    content = _config_content(args)
    agents = [parse_agent(value) for value in (args.agent1, args.agent2) if value is not None]
    if len(agents) != 2:
        agents = [AgentSpec.from_dict(spec) for spec in content["agents"][:2]]

    if len(agents) != 2:
        msg = "A game needs two agents: give --agent1 and --agent2 or list them in the config file."
        raise ConfigError(msg)

    seed = content["seed"] or 0
    config = config_from_file_content(content, seed=seed)
    record = run(
        config = config,
        agent1 = make_agent(agents[0], config, RED),
        agent2 = make_agent(agents[1], config, BLUE),
        seed = seed,
    )
    save(record, args.out)
    _print_outcome(record)
    print(f"record: {args.out}")
    if record.aborted:
        return _exit_code_for_aborted([record.abort_reason])

    return EXIT_SUCCESS

def command_tournament(args) -> int:
    agents = tuple(parse_agent(value) for value in args.agent or [])
    content = _config_content(args)
    try:
        file_agents = tuple(AgentSpec.from_dict(spec) for spec in content["agents"])
    except ValueError as err:
        raise ConfigError(str(err)) from err

    seed = content["seed"] or 0
    plan = TournamentPlan(
        config = config_from_file_content(content, seed=seed),
        agents = agents or file_agents,
        games_per_pair = args.games or content["num_games"] or DEFAULT_GAMES_PER_PAIR,
        base_seed = seed,
        out_dir = args.out_dir or content["out_dir"] or "tournament",
        processes = args.parallel if args.parallel is not None else content["parallel"],
    )
    try:
        table = run_tournament(plan)
    except PartialFailure:
        if args.plot:
            plot_tournament(analyze_directory(plan.out_dir), plan.out_dir)

        raise

    if args.plot:
        plot_tournament(table, plan.out_dir)

    print(table.summary())
    return EXIT_SUCCESS

def command_experiment(args) -> int:
    params = {} if args.params is None else _read_json_argument(args.params, "Experiment params")
    if not isinstance(params, dict):
        msg = f"Experiment params must be a JSON object. Got {params!r}."
        raise ConfigError(msg)

    res = run_experiment(
        name = args.name,
        params = params,
        seed = args.seed or 0,
        out_dir = args.out_dir,
        processes = args.parallel,
    )
    out_dir = args.out_dir or args.name
    with open(os.path.join(out_dir, "summary.txt"), "r") as infile:
        print(infile.read(), end="")

    print(f"files: {', '.join(res['files'])}")
    return EXIT_SUCCESS

def command_replay(args) -> int:
    record = load(args.record)
    if not all(spec.deterministic for spec in record.agent_specs):
        msg = "Only games between scripted agents can be replayed deterministically."
        raise ConfigError(msg)

    replayed = run(
        config = record.config,
        agent1 = make_agent(record.agent_specs[0], record.config, RED),
        agent2 = make_agent(record.agent_specs[1], record.config, BLUE),
        seed = record.seed,
        policy = record.policy,
        invalid_move_retries = record.invalid_move_retries,
    )
    if (replayed.transcript == record.transcript) and (replayed.outcome == record.outcome):
        print(f"Record {record.record_id} reproduced: {len(record.transcript)} messages, {record.outcome.status.value}.")
        return EXIT_SUCCESS

    for turn, (original, new) in enumerate(zip(record.transcript, replayed.transcript)):
        if original != new:
            print(f"First difference on turn {turn}.")
            break
    else:
        print(f"Transcript lengths differ: {len(record.transcript)} vs {len(replayed.transcript)}.")

    return EXIT_PARTIAL_FAILURE

def command_counterfactual(args) -> int:
    record = load(args.record)
    text = args.message
    if text.startswith("@"):
        try:
            with open(text[1:], "r") as infile:
                text = infile.read()
        except OSError as err:
            msg = f"Could not read message file '{text[1:]}': {err}"
            raise ConfigError(msg) from err

    try:
        replacement = parse_message(text, record.config.resources)
    except ProtocolError as err:
        msg = f"Replacement message does not parse: {err}"
        raise InvalidEdit(msg) from err

    agents = (
        make_agent(record.agent_specs[0], record.config, RED),
        make_agent(record.agent_specs[1], record.config, BLUE),
    )
    new_record = counterfactual_rerun(record, args.turn, replacement, agents, seed=args.seed)
    save(new_record, args.out)
    _print_outcome(new_record)
    print(f"record: {args.out} (parent {record.record_id}, edited turn {args.turn})")
    if new_record.aborted:
        return _exit_code_for_aborted([new_record.abort_reason])

    return EXIT_SUCCESS

def command_analyze(args) -> int:
    table = analyze_directory(args.directory)
    if args.plot:
        plot_tournament(table, args.directory)

    print(table.summary())
    return EXIT_SUCCESS

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog = "negotiation-utilities",
        description = "Negotiation games between LLM and scripted agents.",
    )
    parser.add_argument("--debug", action="store_true", help="debug logging and timings")
    subparsers = parser.add_subparsers(dest="command", required=True)

    parser_run = subparsers.add_parser("run", help="play a single game")
    _add_scenario_arguments(parser_run)
    parser_run.add_argument("--agent1", type=str, default=None, help="Player 1 (RED)")
    parser_run.add_argument("--agent2", type=str, default=None, help="Player 2 (BLUE)")
    parser_run.add_argument("--out", type=str, default="game.json")
    parser_run.set_defaults(func=command_run)

    parser_tournament = subparsers.add_parser("tournament", help="all ordered pairs of agents")
    _add_scenario_arguments(parser_tournament)
    parser_tournament.add_argument("--agent", type=str, action="append", help="participant; repeatable")
    parser_tournament.add_argument("--games", type=int, default=None, help="games per ordered pair")
    parser_tournament.add_argument("--out-dir", type=str, default=None)
    parser_tournament.add_argument("--parallel", type=int, default=None, help="process pool size, 1 for serial")
    parser_tournament.add_argument("--plot", action="store_true", help="save heatmaps of the tables")
    parser_tournament.set_defaults(func=command_tournament)

    parser_experiment = subparsers.add_parser("experiment", help="run a named experiment")
    parser_experiment.add_argument("name", type=str, choices=list(EXPERIMENTS))
    parser_experiment.add_argument("--params", type=str, default=None, help="JSON object or file")
    parser_experiment.add_argument("--seed", type=int, default=None)
    parser_experiment.add_argument("--out-dir", type=str, default=None)
    parser_experiment.add_argument("--parallel", type=int, default=None)
    parser_experiment.set_defaults(func=command_experiment)

    parser_replay = subparsers.add_parser("replay", help="re-run a scripted game and compare")
    parser_replay.add_argument("record", type=str)
    parser_replay.set_defaults(func=command_replay)

    parser_counterfactual = subparsers.add_parser("counterfactual", help="edit one turn and re-run")
    parser_counterfactual.add_argument("record", type=str)
    parser_counterfactual.add_argument("--turn", type=int, required=True)
    parser_counterfactual.add_argument(
        "--message", type=str, required=True, help="replacement message text, or @file",
    )
    parser_counterfactual.add_argument("--seed", type=int, default=None)
    parser_counterfactual.add_argument("--out", type=str, default="counterfactual.json")
    parser_counterfactual.set_defaults(func=command_counterfactual)

    parser_analyze = subparsers.add_parser("analyze", help="recompute the tables of a tournament directory")
    parser_analyze.add_argument("directory", type=str)
    parser_analyze.add_argument("--plot", action="store_true", help="save heatmaps of the tables")
    parser_analyze.set_defaults(func=command_analyze)

    return parser

def main(argv: Union[None, list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    debug_mode(args.debug)
    logging.basicConfig(
        level = logging.DEBUG if args.debug else logging.INFO,
        format = "%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)

    except PartialFailure as err:
        logger.error(str(err))
        for path, reason in err.aborted:
            logger.error(f"aborted: {path}: {reason}")

        return _exit_code_for_aborted([reason for _, reason in err.aborted])

    except (
        ConfigError, InvalidOverride, UnknownExperiment, MissingParam,
        UnknownStrategy, UnknownBehavior, InvalidEdit, PersistenceError
    ) as err:
        logger.error(f"{type(err).__name__}: {err}")
        return EXIT_CONFIG_ERROR

    except (NegotiationError, ValueError) as err:
        logger.error(f"{type(err).__name__}: {err}")
        return EXIT_CONFIG_ERROR

if __name__ == "__main__":
    sys.exit(main())
