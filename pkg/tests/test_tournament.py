import os, json, glob
import pytest
from negotiation_utilities.agents import AgentSpec
from negotiation_utilities.negotiation_exceptions import ConfigError, PartialFailure
from negotiation_utilities.parameters import SELLER_BUYER, BLUE
from negotiation_utilities.persistence import read_manifest, load
from negotiation_utilities.scenarios import build
from negotiation_utilities.tournament import (
    TournamentPlan, run_tournament, load_directory, analyze_directory,
    record_path, pair_label
)

SPLITTER = AgentSpec(id="splitter", strategy="split_difference")
CONCEDER = AgentSpec(id="conceder", strategy="anchor_concede")
OUTPUT_FILES = ["manifest.jsonl", "payoff.csv", "summary.txt", "win_rate.csv"]

def _plan(out_dir: str, agents=(SPLITTER, CONCEDER), games: int = 2) -> TournamentPlan:
    return TournamentPlan(
        config = build(SELLER_BUYER),
        agents = agents,
        games_per_pair = games,
        base_seed = 3,
        out_dir = out_dir,
        processes = 1,
    )

def _read(path: str) -> bytes:
    with open(path, "rb") as infile:
        return infile.read()

def test_tournament_output(tmp_path):
    """
    Two agents give four ordered cells with two games each, every record
    on disk and one manifest line per game.

    Raises
    ------
    AssertionError
        If a file is missing or a count is off.
    """
    out_dir = str(tmp_path/"tournament")
    table = run_tournament(_plan(out_dir))

    for fname in OUTPUT_FILES:
        msg = f"Error in tournament output. Expected to find: '{fname}'."
        assert os.path.isfile(os.path.join(out_dir, fname)), msg

    for spec1 in (SPLITTER, CONCEDER):
        for spec2 in (SPLITTER, CONCEDER):
            for game_index in range(2):
                path = record_path(out_dir, pair_label(spec1.id, spec2.id), game_index)
                record = load(path)
                assert record.agent_specs[0].id == spec1.id
                assert record.agent_specs[1].id == spec2.id

    manifest = read_manifest(out_dir)
    assert len(manifest) == 8
    assert manifest[0]["path"] == os.path.join("records", "splitter__vs__splitter", "game_000.json")

    assert table.agent_ids == ("conceder", "splitter")
    assert table.reported_player == BLUE
    assert len(table.cells) == 4
    assert all(cell.games == 2 and cell.aborted == 0 for cell in table.cells.values())

    with open(os.path.join(out_dir, "win_rate.csv")) as infile:
        header = infile.readline().strip()
    assert header == "player2 \\ player1,conceder,splitter"

def test_tournament_is_deterministic(tmp_path):
    """
    Two runs of the same plan write identical files.
    """
    first = str(tmp_path/"first")
    second = str(tmp_path/"second")
    run_tournament(_plan(first))
    run_tournament(_plan(second))

    relative = sorted(
        os.path.relpath(path, first)
        for path in glob.glob(os.path.join(first, "**", "*.*"), recursive=True)
    )
    assert len(relative) == 8 + len(OUTPUT_FILES)
    for fname in relative:
        msg = f"Error in determinism. '{fname}' differs between two runs."
        assert _read(os.path.join(first, fname)) == _read(os.path.join(second, fname)), msg

def test_analyze_directory_reproduces_tables(tmp_path):
    out_dir = str(tmp_path/"tournament")
    run_tournament(_plan(out_dir))
    before = {fname: _read(os.path.join(out_dir, fname)) for fname in OUTPUT_FILES[1:]}
    for fname in before:
        os.remove(os.path.join(out_dir, fname))

    analyze_directory(out_dir)
    for fname, content in before.items():
        msg = f"Error in analyze_directory. '{fname}' differs from the tournament's."
        assert _read(os.path.join(out_dir, fname)) == content, msg

    assert len(load_directory(out_dir)) == 8

def test_invalid_plans(tmp_path):
    with pytest.raises(ConfigError):
        _plan(str(tmp_path), agents=(SPLITTER, AgentSpec(id="splitter", strategy="anchor_concede")))

    with pytest.raises(ConfigError):
        _plan(str(tmp_path), agents=())

    with pytest.raises(ConfigError):
        _plan(str(tmp_path), games=0)

    with pytest.raises(ConfigError):
        load_directory(str(tmp_path))

def test_colliding_record_directories(tmp_path):
    """
    Ids that differ only in characters replaced in directory names, or
    only in case, would write to the same records directory and are
    rejected.

    Raises
    ------
    AssertionError
        If a colliding plan is accepted.
    """
    for first, second in (("a/b", "a_b"), ("Splitter", "splitter"), ("a b", "a_b")):
        agents = (
            AgentSpec(id=first, strategy="split_difference"),
            AgentSpec(id=second, strategy="anchor_concede"),
        )
        with pytest.raises(ConfigError):
            _plan(str(tmp_path), agents=agents)

    agents = (
        AgentSpec(id="a.b", strategy="split_difference"),
        AgentSpec(id="a-b", strategy="anchor_concede"),
    )
    plan = _plan(str(tmp_path), agents=agents)
    paths = {
        record_path(plan.out_dir, pair_label(spec1.id, spec2.id), 0)
        for spec1, spec2 in plan.pairs()
    }
    assert len(paths) == 4

def test_aborted_games(tmp_path):
    """
    An agent that runs out of scripted moves aborts every game it plays;
    the tables are still written and the aborted games reported.
    """
    broken = AgentSpec(id="broken", strategy="fixed_sequence", params={
        "moves": [{"trade": {"from_red": {"X": 1}, "from_blue": {"ZUP": 50}}}]
    })
    out_dir = str(tmp_path/"tournament")
    with pytest.raises(PartialFailure) as excinfo:
        run_tournament(_plan(out_dir, agents=(SPLITTER, broken), games=1))

    aborted = excinfo.value.aborted
    assert len(aborted) == 3
    assert all(reason.startswith("StrategyExhausted") for _, reason in aborted)
    for fname in OUTPUT_FILES:
        assert os.path.isfile(os.path.join(out_dir, fname))

    table = analyze_directory(out_dir)
    cell = table.cells[("broken", "broken")]
    assert (cell.games, cell.aborted) == (1, 1)
    assert table.cells[("splitter", "splitter")].aborted == 0

def test_plan_from_config_file(tmp_path):
    path = tmp_path/"tournament.json"
    path.write_text(json.dumps({
        "format_version": "1.0",
        "kind": SELLER_BUYER,
        "agents": [SPLITTER.to_dict(), CONCEDER.to_dict()],
        "num_games": 5,
        "seed": 11,
        "out_dir": str(tmp_path/"out"),
    }))
    plan = TournamentPlan.from_config_file(str(path), games_per_pair=None, processes=1)
    assert plan.games_per_pair == 5
    assert plan.base_seed == 11
    assert plan.processes == 1
    assert [spec.id for spec in plan.agents] == ["splitter", "conceder"]
    assert len(plan.pairs()) == 4

if __name__ == "__main__":
    import tempfile, pathlib
    with tempfile.TemporaryDirectory() as tmp:
        test_tournament_output(pathlib.Path(tmp))
