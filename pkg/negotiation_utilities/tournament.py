from __future__ import annotations
import os, re, glob, time, logging
from dataclasses import dataclass
from typing import Union
from .agents import AgentSpec
from .analysis import metric_table, MetricTable
from .engine import run_many, derive_seed
from .negotiation_exceptions import ConfigError, PartialFailure
from .parameters import DEFAULT_GAMES_PER_PAIR, flags
from .persistence import save, load, append_manifest, MANIFEST_NAME
from .scenarios import ScenarioConfig, load_config_file, config_from_file_content

logger = logging.getLogger(__name__)

RECORDS_DIRECTORY = "records"

def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name)

def record_path(out_dir: str, label: str, game_index: int) -> str:
    """
    out_dir/records/<label>/game_###.json
    """
    return os.path.join(out_dir, RECORDS_DIRECTORY, _safe_name(label), f"game_{game_index:03d}.json")

def pair_label(agent1_id: str, agent2_id: str) -> str:
    return f"{agent1_id}__vs__{agent2_id}"

@dataclass(frozen=True)
class TournamentPlan:
    """
    Every ordered pair of agents, self-play included, plays
    games_per_pair games of the same scenario.

    Attributes
    ----------
    config : ScenarioConfig
        The scenario.

    agents : tuple[AgentSpec, ...]
        Participants. Ids must be unique, also as record directory
        names.

    games_per_pair : int
        Games per ordered pair.

    base_seed : int
        Game seeds are derived from (base_seed, pair index, game index).

    out_dir : str
        Output directory.

    processes : Union[None, int]
        Process pool size, None for every core.
    """
    config: ScenarioConfig
    agents: tuple
    games_per_pair: int = DEFAULT_GAMES_PER_PAIR
    base_seed: int = 0
    out_dir: str = "tournament"
    processes: Union[None, int] = None

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if not self.agents:
            msg = "A tournament needs at least one agent."
            raise ConfigError(msg)

        ids = [spec.id for spec in self.agents]
        if len(set(ids)) != len(ids):
            msg = f"Agent ids must be unique. Got {ids}."
            raise ConfigError(msg)

        directories = {}
        for spec1, spec2 in self.pairs():
            pair = (spec1.id, spec2.id)
            directory = _safe_name(pair_label(*pair)).casefold()
            if (other := directories.setdefault(directory, pair)) != pair:
                msg = f"Agent pairs {other} and {pair} would share the record"
                msg += f" directory '{directory}'. Agent ids must stay distinct when"
                msg += " characters other than letters, digits, '.', '_' and '-'"
                msg += " are replaced by '_' and case is ignored."
                raise ConfigError(msg)

        if self.games_per_pair < 1:
            msg = f"'games_per_pair' must be at least 1. Got {self.games_per_pair}."
            raise ConfigError(msg)

    def pairs(self) -> list[tuple[AgentSpec, AgentSpec]]:
        """
        Ordered (Player 1, Player 2) pairs. (A, B) and (B, A) are
        distinct cells.
        """
        return [(spec1, spec2) for spec1 in self.agents for spec2 in self.agents]

    @classmethod
    def from_config_file(cls, path: str, **overrides) -> TournamentPlan:
        """
        Build a plan from a JSON config file. Keyword arguments that are
        not None override the file.
        """
        content = load_config_file(path)
        seed = overrides.get("base_seed")
        seed = content["seed"] if seed is None else seed
        try:
            agents = tuple(AgentSpec.from_dict(spec) for spec in content["agents"])
        except ValueError as err:
            raise ConfigError(str(err)) from err

        kwargs = {
            "config": config_from_file_content(content, seed=seed),
            "agents": agents,
            "games_per_pair": content["num_games"] or DEFAULT_GAMES_PER_PAIR,
            "base_seed": seed,
            "out_dir": content["out_dir"] or "tournament",
            "processes": content["parallel"],
        }
        for key, value in overrides.items():
            if value is not None:
                kwargs[key] = value

        return cls(**kwargs)

def save_records(out_dir: str, labelled_records: list) -> list[str]:
    """
    Save records to out_dir/records/<label>/game_###.json and append
    them to the manifest in the given order.

    Parameters
    ----------
    labelled_records : list[tuple[str, int, GameRecord]]
        (label, game index, record).

    Returns
    -------
    : list[str]
        Paths of the saved records.
    """
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    if os.path.isfile(manifest_path):
        os.remove(manifest_path)

    paths = []
    for label, game_index, record in labelled_records:
        path = record_path(out_dir, label, game_index)
        save(record, path)
        append_manifest(out_dir, {
            "path": os.path.relpath(path, out_dir),
            "record_id": record.record_id,
            "label": label,
            "game_index": game_index,
            "seed": record.seed,
            "status": record.outcome.status.value,
            "winner": record.outcome.winner,
        })
        paths.append(path)

    return paths

def aborted_games(labelled_records: list, paths: list[str]) -> list[tuple[str, str]]:
    return [
        (path, record.abort_reason)
        for (_, _, record), path in zip(labelled_records, paths) if record.aborted
    ]

def run_tournament(plan: TournamentPlan) -> MetricTable:
    """
    Play every cell of the plan, save every record and write the
    metric tables.

    Output tree:
        out_dir/records/<p1>__vs__<p2>/game_###.json
        out_dir/manifest.jsonl
        out_dir/win_rate.csv
        out_dir/payoff.csv
        out_dir/summary.txt

    Returns
    -------
    : MetricTable
        Metrics over the completed games.

    Raises
    ------
    PartialFailure
        After writing everything, if some games were aborted.
    """
    tournament_time = time.perf_counter()  # Debug.
    os.makedirs(plan.out_dir, exist_ok=True)
    pairs = plan.pairs()
    jobs = []
    labels = []
    for pair_index, (spec1, spec2) in enumerate(pairs):
        for game_index in range(plan.games_per_pair):
            jobs.append((plan.config, spec1, spec2, derive_seed(plan.base_seed, pair_index, game_index)))
            labels.append((pair_label(spec1.id, spec2.id), game_index))

    logger.info(f"Playing {len(jobs)} {plan.config.kind} games in {len(pairs)} cells.")
    records = run_many(jobs, processes=plan.processes)

    labelled_records = []
    for (label, game_index), record in zip(labels, records):
        logger.info(
            f"Game {game_index + 1}/{plan.games_per_pair} in cell {label}"
            f" finished: {record.outcome.status.value}"
        )
        labelled_records.append((label, game_index, record))

    paths = save_records(plan.out_dir, labelled_records)
    table = metric_table(records)
    table.write(plan.out_dir)

    tournament_time = time.perf_counter() - tournament_time
    if flags["debug"]:
        logger.debug(f"{tournament_time = } s")

    if aborted := aborted_games(labelled_records, paths):
        msg = f"{len(aborted)} of {len(records)} games were aborted."
        msg += " Metrics are computed over the completed games."
        raise PartialFailure(msg, aborted)

    return table

def load_directory(out_dir: str) -> list:
    """
    Load every record under out_dir/records in path order.
    """
    paths = sorted(glob.glob(os.path.join(out_dir, RECORDS_DIRECTORY, "*", "game_*.json")))
    if not paths:
        msg = f"No game records found under '{os.path.join(out_dir, RECORDS_DIRECTORY)}'."
        raise ConfigError(msg)

    return [load(path) for path in paths]

def analyze_directory(out_dir: str) -> MetricTable:
    """
    Rebuild win_rate.csv, payoff.csv and summary.txt of a tournament
    directory from its saved records alone.
    """
    table = metric_table(load_directory(out_dir))
    table.write(out_dir)
    return table
