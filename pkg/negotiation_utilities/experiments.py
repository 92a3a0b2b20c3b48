"""
Named experiments. Each one plays its games, saves the records under
out_dir/records, writes a table (<name>.csv), plot-ready pairs where
applicable (<name>_pairs.csv) and a summary (summary.txt). With
the parameter "plot": true, anchoring, split_difference and
acceptance_curve also save PNG figures.

    anchoring             first proposed price vs accepted price.
    split_difference      counter-proposals vs the mean of the two
                          previous proposals.
    overvalued_buyer      how often the buyer counters with a higher
                          price, baseline vs over-valued buyer.
    acceptance_curve      acceptance rate of a decider per offered
                          amount in short ultimatum games.
    split_scaling         Player 1's share in multi-turn ultimatum
                          games per endowment size.
    denomination_scaling  buyer's retained budget per currency scale.
    behavior              Player 1 fixed, Player 2 with the behavior
                          prompts.
"""
from __future__ import annotations
import os, json, logging
from fractions import Fraction
from typing import Union
from .agents import AgentSpec
from .analysis import (
    anchoring_probe_by_condition, split_difference_probe, bad_counteroffer_counts,
    binomial_test_one_tailed, acceptance_curve, split_scaling_sweep,
    denomination_scaling_sweep, win_rate, mean_payoff, write_csv, format_value,
    format_exact
)
from .engine import run_many, derive_seed
from .negotiation_exceptions import (
    UnknownExperiment, MissingParam, ConfigError, PartialFailure, EmptyInput
)
from .parameters import (
    RED, BLUE, SELLER_BUYER, BEHAVIORS, SCENARIO_KINDS, reported_player
)
from .plots import plot_pairs, plot_acceptance_curve
from .scenarios import build
from .tournament import save_records, aborted_games

logger = logging.getLogger(__name__)

def _spec(value: Union[AgentSpec, dict]) -> AgentSpec:
    if isinstance(value, AgentSpec):
        return value

    try:
        return AgentSpec.from_dict(value)
    except ValueError as err:
        raise ConfigError(str(err)) from err

def _with_params(spec: AgentSpec, **params) -> AgentSpec:
    merged = dict(spec.params)
    merged.update(params)
    return AgentSpec.from_dict({**spec.to_dict(), "params": merged})

def _write_summary(out_dir: str, lines: list[str]) -> str:
    path = os.path.join(out_dir, "summary.txt")
    with open(path, "w") as outfile:
        outfile.write("\n".join(lines) + "\n")

    return path

def _play(out_dir: str, labelled_jobs: list, processes: Union[None, int]) -> tuple[dict, list]:
    """
    Play (label, job) pairs and save the records.

    Returns
    -------
    records_by_label : dict
        {label: [GameRecord, ...]} in job order.

    aborted : list[tuple[str, str]]
        (path, reason) of aborted games.
    """
    records = run_many([job for _, job in labelled_jobs], processes=processes)
    counters = {}
    labelled_records = []
    records_by_label = {}
    for (label, _), record in zip(labelled_jobs, records):
        game_index = counters.get(label, 0)
        counters[label] = game_index + 1
        labelled_records.append((label, game_index, record))
        records_by_label.setdefault(label, []).append(record)

    paths = save_records(out_dir, labelled_records)
    return records_by_label, aborted_games(labelled_records, paths)

DEFAULT_ANCHORS = list(range(60, 141, 10))

def _anchoring(params: dict, seed: int, out_dir: str, processes) -> dict:
    seller = _spec(params.get("seller", {
        "id": "anchor-concede-seller", "strategy": "anchor_concede",
        "params": {"rate": "0.25", "reservation": 40},
    }))
    buyer = _spec(params.get("buyer", {
        "id": "split-difference-buyer", "strategy": "split_difference",
        "params": {"anchor": 20, "accept_threshold": 5},
    }))
    anchors = list(params.get("anchors", DEFAULT_ANCHORS))
    games = params.get("games", 100)
    conditions = params.get("conditions", {"fixed": {}, "sampled": {"sample_valuations": True}})
    budget = params.get("buyer_budget", 200)

    labelled_jobs = []
    for condition_index, (condition, overrides) in enumerate(conditions.items()):
        overrides = dict(overrides)
        overrides.setdefault("endowments", {})
        overrides["endowments"] = {**overrides["endowments"], BLUE: {"ZUP": budget}}
        for game in range(games):
            game_seed = derive_seed(seed, condition_index, game)
            config = build(SELLER_BUYER, overrides, seed=game_seed)
            game_seller = seller
            if seller.kind == "scripted" and anchors:
                game_seller = _with_params(seller, anchor=anchors[game%len(anchors)])

            labelled_jobs.append((condition, (config, game_seller, buyer, game_seed)))

    records_by_label, aborted = _play(out_dir, labelled_jobs, processes)
    probes = anchoring_probe_by_condition(records_by_label)

    rows = [
        [condition, first, final]
        for condition, (pairs, _) in probes.items() if condition != "pooled"
        for first, final in pairs
    ]
    write_csv(os.path.join(out_dir, "anchoring_pairs.csv"), ["condition", "first_proposal", "final_price"], rows)
    write_csv(
        path = os.path.join(out_dir, "anchoring.csv"),
        header = ["condition", "sales", "spearman", "spearman_exact"],
        rows = [
            [condition, len(pairs), format_value(rho), format_exact(rho)]
            for condition, (pairs, rho) in probes.items()
        ],
    )
    if params.get("plot", False):
        for condition, (pairs, rho) in probes.items():
            plot_pairs(pairs, rho, fname=os.path.join(out_dir, f"anchoring_{condition}.png"))

    lines = ["Experiment: anchoring"]
    lines += [
        f"{condition}: sales {len(pairs)}, spearman {format_value(rho)}"
        for condition, (pairs, rho) in probes.items()
    ]
    return {
        "statistics": {condition: rho for condition, (_, rho) in probes.items()},
        "lines": lines,
        "aborted": aborted,
    }

def _split_difference(params: dict, seed: int, out_dir: str, processes) -> dict:
    seller = _spec(params.get("seller", {
        "id": "split-difference-seller", "strategy": "split_difference",
        "params": {"anchor": 100, "accept_threshold": 5},
    }))
    buyer = _spec(params.get("buyer", {
        "id": "split-difference-buyer", "strategy": "split_difference",
        "params": {"anchor": 20, "accept_threshold": 5},
    }))
    games = params.get("games", 100)
    overrides = params.get("overrides", {})
    labelled_jobs = []
    for game in range(games):
        game_seed = derive_seed(seed, game)
        config = build(SELLER_BUYER, overrides, seed=game_seed)
        labelled_jobs.append(("split_difference", (config, seller, buyer, game_seed)))

    records_by_label, aborted = _play(out_dir, labelled_jobs, processes)
    pairs, rho = split_difference_probe(records_by_label["split_difference"])
    write_csv(
        path = os.path.join(out_dir, "split_difference_pairs.csv"),
        header = ["previous_mean", "next_proposal"],
        rows = [[format_exact(mean), proposal] for mean, proposal in pairs],
    )
    write_csv(
        path = os.path.join(out_dir, "split_difference.csv"),
        header = ["pairs", "spearman", "spearman_exact"],
        rows = [[len(pairs), format_value(rho), format_exact(rho)]],
    )
    if params.get("plot", False):
        plot_pairs(
            pairs = pairs,
            rho = rho,
            xlabel = "Mean of the two previous proposals",
            ylabel = "Next proposal",
            fname = os.path.join(out_dir, "split_difference.png"),
        )

    return {
        "statistics": {"spearman": rho},
        "lines": ["Experiment: split_difference", f"pairs {len(pairs)}, spearman {format_value(rho)}"],
        "aborted": aborted,
    }

def _overvalued_buyer(params: dict, seed: int, out_dir: str, processes) -> dict:
    """
    The one-tailed binomial test compares the over-valued count with the
    baseline rate as null probability.
    """
    seller = _spec(params.get("seller", {
        "id": "split-difference-seller", "strategy": "split_difference",
    }))
    buyer = _spec(params.get("buyer", {
        "id": "split-difference-buyer", "strategy": "split_difference",
    }))
    games = params.get("games", 100)
    conditions = {"baseline": {}, "over_valued": {"over_valued_buyer": True}}
    labelled_jobs = []
    for condition_index, (condition, overrides) in enumerate(conditions.items()):
        for game in range(games):
            game_seed = derive_seed(seed, condition_index, game)
            config = build(SELLER_BUYER, {**params.get("overrides", {}), **overrides}, seed=game_seed)
            labelled_jobs.append((condition, (config, seller, buyer, game_seed)))

    records_by_label, aborted = _play(out_dir, labelled_jobs, processes)
    counts = {
        condition: bad_counteroffer_counts(records_by_label[condition]) for condition in conditions
    }
    rates = {
        condition: (Fraction(k, n) if n else None) for condition, (k, n) in counts.items()
    }
    p0 = rates["baseline"]
    k, n = counts["over_valued"]
    p_value = None
    if (p0 is not None) and (0 < p0 < 1) and n:
        p_value = binomial_test_one_tailed(k, n, p0)

    write_csv(
        path = os.path.join(out_dir, "overvalued_buyer.csv"),
        header = ["condition", "higher_counteroffers", "counteroffers", "rate", "rate_exact"],
        rows = [
            [condition, counts[condition][0], counts[condition][1],
             format_value(rates[condition]), format_exact(rates[condition])]
            for condition in conditions
        ],
    )
    lines = ["Experiment: overvalued_buyer"]
    lines += [
        f"{condition}: {counts[condition][0]} of {counts[condition][1]} counter-offers"
        f" ask a higher price, rate {format_value(rates[condition])}"
        for condition in conditions
    ]
    lines.append(
        f"One-tailed binomial test, over_valued count against the baseline rate: p = {format_value(p_value)}"
    )
    return {
        "statistics": {"rates": rates, "p_value": p_value},
        "lines": lines,
        "aborted": aborted,
    }

def _acceptance_curve(params: dict, seed: int, out_dir: str, processes) -> dict:
    decider = _spec(params.get("decider", {"id": "rational-decider", "strategy": "rational_ultimatum"}))
    variant = params.get("variant", "classical_2turn")
    amounts = list(params.get("amounts", range(0, 11)))
    trials = params.get("trials", 20)
    curve = acceptance_curve(
        decider_spec = decider,
        variant = variant,
        amounts = amounts,
        trials = trials,
        seed = seed,
        units = params.get("units"),
        processes = processes,
    )
    write_csv(
        path = os.path.join(out_dir, "acceptance_curve.csv"),
        header = ["amount", "acceptance", "acceptance_exact"],
        rows = [[amount, format_value(rate), format_exact(rate)] for amount, rate in curve],
    )
    if params.get("plot", False):
        plot_acceptance_curve(curve, label=decider.id, fname=os.path.join(out_dir, "acceptance_curve.png"))

    lines = [f"Experiment: acceptance_curve ({variant}, {trials} trials per amount)"]
    lines += [f"{amount}: {format_value(rate)}" for amount, rate in curve]
    return {"statistics": {"curve": curve}, "lines": lines, "aborted": []}

def _split_scaling(params: dict, seed: int, out_dir: str, processes) -> dict:
    agent1 = _spec(params.get("agent1", {"id": "rational-1", "strategy": "rational_ultimatum"}))
    agent2 = _spec(params.get("agent2", {"id": "rational-2", "strategy": "rational_ultimatum"}))
    amounts = list(params.get("amounts", [10**k for k in range(1, 11)]))
    games = params.get("games", 20)
    sweep = split_scaling_sweep(
        amounts = amounts,
        agent1_spec = agent1,
        agent2_spec = agent2,
        games_per_amount = games,
        seed = seed,
        max_rounds = params.get("max_rounds"),
        processes = processes,
    )
    write_csv(
        path = os.path.join(out_dir, "split_scaling.csv"),
        header = ["amount", "player1_share", "player1_share_exact"],
        rows = [[amount, format_value(share), format_exact(share)] for amount, share in sweep],
    )
    lines = ["Experiment: split_scaling"]
    lines += [f"{amount}: Player 1 share {format_value(share)}" for amount, share in sweep]
    return {"statistics": {"sweep": sweep}, "lines": lines, "aborted": []}

def _denomination_scaling(params: dict, seed: int, out_dir: str, processes) -> dict:
    seller = _spec(params.get("seller", {"id": "anchor-concede-seller", "strategy": "anchor_concede"}))
    buyer = _spec(params.get("buyer", {"id": "anchor-concede-buyer", "strategy": "anchor_concede"}))
    scales = list(params.get("scales", [1, 10, 100, 1000]))
    games = params.get("games", 20)
    sweep = denomination_scaling_sweep(
        scales = scales,
        seller_spec = seller,
        buyer_spec = buyer,
        games_per_scale = games,
        seed = seed,
        overrides = params.get("overrides"),
        processes = processes,
    )
    write_csv(
        path = os.path.join(out_dir, "denomination_scaling.csv"),
        header = ["scale", "buyer_retained", "buyer_retained_exact"],
        rows = [[scale, format_value(share), format_exact(share)] for scale, share in sweep],
    )
    lines = ["Experiment: denomination_scaling"]
    lines += [f"{scale}: buyer keeps {format_value(share)} of its budget" for scale, share in sweep]
    return {"statistics": {"sweep": sweep}, "lines": lines, "aborted": []}

def _behavior(params: dict, seed: int, out_dir: str, processes) -> dict:
    if "agent" not in params:
        msg = "Experiment 'behavior' needs the parameter 'agent' (an agent spec)."
        raise MissingParam(msg)

    agent = _spec(params["agent"])
    kind = params.get("kind", SELLER_BUYER)
    if kind not in SCENARIO_KINDS:
        msg = f"'kind' must be in {SCENARIO_KINDS}! Got '{kind}'."
        raise ConfigError(msg)

    games = params.get("games", 80)
    player1 = AgentSpec.from_dict({**agent.to_dict(), "behavior": None})
    labelled_jobs = []
    conditions = ["default"] + list(BEHAVIORS)
    for condition_index, condition in enumerate(conditions):
        behavior = None if condition == "default" else condition
        player2 = AgentSpec.from_dict({
            **agent.to_dict(), "id": f"{agent.id}+{condition}", "behavior": behavior
        })
        for game in range(games):
            game_seed = derive_seed(seed, condition_index, game)
            config = build(kind, params.get("overrides", {}), seed=game_seed)
            labelled_jobs.append((condition, (config, player1, player2, game_seed)))

    records_by_label, aborted = _play(out_dir, labelled_jobs, processes)
    player = reported_player[kind]
    rows = []
    statistics = {}
    for condition in conditions:
        records = records_by_label[condition]
        rate = win_rate(records, player)
        try:
            payoffs = {p: mean_payoff(records, p) for p in (RED, BLUE)}
        except EmptyInput:
            payoffs = {RED: None, BLUE: None}

        statistics[condition] = {"win_rate": rate, "mean_payoff": payoffs}
        rows.append([
            condition, len(records), format_value(rate),
            format_value(payoffs[RED]), format_value(payoffs[BLUE])
        ])

    write_csv(
        path = os.path.join(out_dir, "behavior.csv"),
        header = ["player2_behavior", "games", f"win_rate_{player}", "mean_payoff_RED", "mean_payoff_BLUE"],
        rows = rows,
    )
    lines = [f"Experiment: behavior ({kind}, reported player {player})"]
    lines += [
        f"{row[0]}: games {row[1]}, win rate {row[2]}, mean payoff RED {row[3]}, BLUE {row[4]}"
        for row in rows
    ]
    return {"statistics": statistics, "lines": lines, "aborted": aborted}

EXPERIMENTS = {
    "anchoring": _anchoring,
    "split_difference": _split_difference,
    "overvalued_buyer": _overvalued_buyer,
    "acceptance_curve": _acceptance_curve,
    "split_scaling": _split_scaling,
    "denomination_scaling": _denomination_scaling,
    "behavior": _behavior,
}

def run_experiment(
    name: str,
    params: Union[None, dict] = None,
    seed: int = 0,
    out_dir: Union[None, str] = None,
    processes: Union[None, int] = None
) -> dict:
    """
    Run a named experiment end to end.

    Parameters
    ----------
    name : str
        One of EXPERIMENTS.

    params : Union[None, dict]
        Experiment parameters. Agent specs are given as dictionaries
        (AgentSpec fields). Missing parameters get defaults.

    seed : int
        Base seed.

    out_dir : Union[None, str]
        Output directory. Defaults to the experiment name.

    Returns
    -------
    : dict
        {"name", "statistics", "files"}.

    Raises
    ------
    UnknownExperiment
        If name is not known.

    MissingParam
        If a required parameter is absent.

    PartialFailure
        After writing every file, if some games were aborted.
    """
    if name not in EXPERIMENTS:
        msg = f"Unknown experiment '{name}'. Known: {list(EXPERIMENTS)}."
        raise UnknownExperiment(msg)

    params = {} if params is None else dict(params)
    out_dir = name if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    logger.info(f"Running experiment '{name}' with seed {seed} into '{out_dir}'.")

    res = EXPERIMENTS[name](params, seed, out_dir, processes)
    summary_lines = res["lines"] + [f"seed: {seed}", f"params: {json.dumps(params, sort_keys=True, default=str)}"]
    _write_summary(out_dir, summary_lines)
    files = sorted(
        fname for fname in os.listdir(out_dir) if os.path.isfile(os.path.join(out_dir, fname))
    )
    if res["aborted"]:
        msg = f"{len(res['aborted'])} games of experiment '{name}' were aborted."
        raise PartialFailure(msg, res["aborted"])

    return {"name": name, "statistics": res["statistics"], "files": files}
