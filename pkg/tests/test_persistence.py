import os, json
from itertools import zip_longest
import numpy as np
import pytest
from negotiation_utilities.agents import Agent, AgentSpec, make_agent
from negotiation_utilities.core import GameStatus, ResourceBundle, Trade
from negotiation_utilities.engine import run, derive_seed
from negotiation_utilities.negotiation_exceptions import (
    CorruptRecord, UnsupportedVersion, IoFailure, InvalidEdit
)
from negotiation_utilities.parameters import RED, BLUE, SELLER_BUYER, RESOURCE_EXCHANGE, ULTIMATUM
from negotiation_utilities.persistence import (
    FORMAT_VERSION, GameRecord, save, load, dumps, counterfactual_rerun,
    append_manifest, read_manifest
)
from negotiation_utilities.protocol import Decision, StructuredMessage
from negotiation_utilities.scenarios import build

FIXTURE_V1_0 = os.path.join(os.path.dirname(os.path.abspath(__file__)), "record_v1_0.json")

def _seller_buyer_record(budget: int = 200) -> GameRecord:
    config = build(SELLER_BUYER, {"endowments": {BLUE: {"ZUP": budget}}})
    seller = AgentSpec(id="seller", strategy="split_difference", params={"anchor": 100, "accept_threshold": 5})
    buyer = AgentSpec(id="buyer", strategy="split_difference", params={"anchor": 20, "accept_threshold": 5})
    return run(config, make_agent(seller, config, RED), make_agent(buyer, config, BLUE))

def _agents(record: GameRecord):
    return (
        make_agent(record.agent_specs[0], record.config, RED),
        make_agent(record.agent_specs[1], record.config, BLUE),
    )

def _opening(price: int, player: str = RED) -> StructuredMessage:
    return StructuredMessage(
        player_name = player,
        turn_echo = (1, 10),
        public_text = f"One X for {price} ZUP.",
        trade = Trade(ResourceBundle(X=1), ResourceBundle(ZUP=price), proposer=player),
        decision = Decision.PROPOSE,
    )

def _prices(record) -> list[int]:
    return [
        entry.message.trade.from_blue.get("ZUP")
        for entry in record.transcript if entry.message.trade is not None
    ]

def test_save_and_load(tmp_path):
    """
    A saved record loads back equal, and saving it again gives the
    same bytes.

    Raises
    ------
    AssertionError
        If the loaded record or the re-serialized text differs.
    """
    record = _seller_buyer_record()
    path = tmp_path / "game.json"
    save(record, str(path))
    loaded = load(str(path))
    assert loaded == record
    assert loaded.record_id == record.record_id
    assert path.read_text(encoding="utf-8") == dumps(loaded.to_dict())

    content = json.loads(path.read_text(encoding="utf-8"))
    assert content["format_version"] == FORMAT_VERSION
    assert content["outcome"]["payoffs"] == {RED: "5", BLUE: "15"}

ROUND_TRIP_STRATEGIES = {
    RESOURCE_EXCHANGE: ("split_difference", "anchor_concede"),
    ULTIMATUM: ("rational_ultimatum", "fairness_threshold"),
    SELLER_BUYER: ("split_difference", "anchor_concede"),
}
IMPOSSIBLE_GIFT = {RESOURCE_EXCHANGE: "X", ULTIMATUM: "Dollars", SELLER_BUYER: "X"}

def _seeded_record(game: int) -> GameRecord:
    """
    Scripted game number game. Every fourth game RED only proposes
    trades it cannot pay for (FORFEIT), every fourth BLUE has no moves
    (ABORTED), the rest end ACCEPTED or MAX_TURNS.
    """
    rng = np.random.default_rng(derive_seed(41, game))
    kind = list(ROUND_TRIP_STRATEGIES)[game%3]
    overrides = {"max_rounds": int(rng.integers(2, 9))}
    if kind == ULTIMATUM:
        overrides.update({"amount": int(rng.integers(2, 101)), "variant": "multi_turn"})

    config = build(kind, overrides)
    strategies = ROUND_TRIP_STRATEGIES[kind]
    red = AgentSpec(id="red", strategy=strategies[rng.integers(0, 2)])
    blue = AgentSpec(id="blue", strategy=strategies[rng.integers(0, 2)])
    case = (game//3)%4
    if case == 0:
        impossible = {"trade": {"from_red": {IMPOSSIBLE_GIFT[kind]: 10**6}}}
        red = AgentSpec(id="red", strategy="fixed_sequence", params={"moves": [impossible]*4})
    elif case == 1:
        blue = AgentSpec(id="blue", strategy="fixed_sequence", params={"moves": []})

    return run(config, make_agent(red, config, RED), make_agent(blue, config, BLUE), seed=game)

def test_many_records_round_trip(tmp_path):
    """
    Save and load 500 seeded records over the three scenarios and every
    terminal status. Each loads back equal with the same record_id, and
    playing the same game again gives the same record_id.

    Raises
    ------
    AssertionError
        If a record changes on the way through the file.
    """
    statuses = set()
    kinds = set()
    for game in range(500):
        record = _seeded_record(game)
        path = tmp_path / f"game_{game:03d}.json"
        save(record, str(path))
        loaded = load(str(path))

        msg = f"Error in round trip of game {game} ({record.kind}, {record.outcome.status.value})."
        assert loaded == record, msg
        assert loaded.record_id == record.record_id, msg
        assert _seeded_record(game).record_id == record.record_id, msg

        statuses.add(record.outcome.status)
        kinds.add(record.kind)

    expected = {GameStatus.ACCEPTED, GameStatus.MAX_TURNS, GameStatus.FORFEIT, GameStatus.ABORTED}
    msg = f"Error in round trip coverage. Expected statuses: {expected}, got: {statuses}."
    assert statuses == expected, msg
    assert kinds == set(ROUND_TRIP_STRATEGIES)

def test_forfeited_record_loads(tmp_path):
    config = build(RESOURCE_EXCHANGE)
    impossible = {"trade": {"from_red": {"X": 30}, "from_blue": {}}}
    red = AgentSpec(id="red", strategy="fixed_sequence", params={"moves": [impossible]*4})
    blue = AgentSpec(id="blue", strategy="split_difference")
    record = run(config, make_agent(red, config, RED), make_agent(blue, config, BLUE))
    path = tmp_path / "forfeit.json"
    save(record, str(path))
    loaded = load(str(path))
    assert loaded.outcome.status == GameStatus.FORFEIT
    assert len(loaded.invalid_attempts) == 4

def test_failed_save_keeps_the_old_file(tmp_path, monkeypatch):
    """
    If the final rename fails, the previous file is untouched and no
    temporary file is left behind.
    """
    record = _seller_buyer_record()
    path = tmp_path / "game.json"
    save(record, str(path))
    before = path.read_bytes()

    def broken_replace(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", broken_replace)
    with pytest.raises(IoFailure):
        save(_seller_buyer_record(budget=150), str(path))

    assert path.read_bytes() == before
    assert sorted(os.listdir(tmp_path)) == ["game.json"]

def test_corrupt_records(tmp_path):
    record = _seller_buyer_record()
    path = tmp_path / "game.json"
    save(record, str(path))
    text = path.read_text(encoding="utf-8")

    truncated = tmp_path / "truncated.json"
    truncated.write_text(text[:len(text)//2], encoding="utf-8")
    with pytest.raises(CorruptRecord):
        load(str(truncated))

    content = json.loads(text)
    content["outcome"]["payoffs"][RED] = "6"
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(content), encoding="utf-8")
    with pytest.raises(CorruptRecord):
        load(str(tampered))

    content = json.loads(text)
    content["transcript"] = content["transcript"][:-1]
    shortened = tmp_path / "shortened.json"
    shortened.write_text(json.dumps(content), encoding="utf-8")
    with pytest.raises(CorruptRecord):
        load(str(shortened))

    content = json.loads(text)
    del content["config"]
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps(content), encoding="utf-8")
    with pytest.raises(CorruptRecord):
        load(str(missing))

    with pytest.raises(IoFailure):
        load(str(tmp_path / "does_not_exist.json"))

@pytest.mark.parametrize("version", ["2.0", "1.9", "0.3"])
def test_unsupported_versions(tmp_path, version):
    record = _seller_buyer_record()
    content = record.to_dict()
    content["format_version"] = version
    path = tmp_path / "future.json"
    path.write_text(dumps(content), encoding="utf-8")
    with pytest.raises(UnsupportedVersion):
        load(str(path))

def test_version_1_0_record():
    """
    A record written before invalid_attempts, provenance and backend
    existed loads with defaults for them.
    """
    record = load(FIXTURE_V1_0)
    assert record.format_version == FORMAT_VERSION
    assert record.invalid_attempts == ()
    assert record.provenance is None
    assert record.backend == {RED: "scripted:fixed_sequence", BLUE: "scripted:fixed_sequence"}
    assert record.outcome.final_holdings[RED] == ResourceBundle(Dollars=7)
    assert record.outcome.final_holdings[BLUE] == ResourceBundle(Dollars=3)

def test_counterfactual_opening():
    """
    Replacing the seller's opening 100 with 120 and letting both
    split-the-difference agents play on gives 120, 20, 70, 45, 57, 51,
    54, and the buyer accepts 54.
    """
    record = _seller_buyer_record()
    for calculated, expected in zip_longest(_prices(record), [100, 20, 60, 40, 50, 45]):
        msg = f"Error in original prices. Expected: {expected}, got: {calculated}."
        assert calculated == expected, msg

    new_record = counterfactual_rerun(record, 0, _opening(120), _agents(record))
    for calculated, expected in zip_longest(_prices(new_record), [120, 20, 70, 45, 57, 51, 54]):
        msg = f"Error in counterfactual prices. Expected: {expected}, got: {calculated}."
        assert calculated == expected, msg

    assert new_record.outcome.status == GameStatus.ACCEPTED
    assert new_record.transcript[-1].player == BLUE
    assert new_record.outcome.final_holdings[RED] == ResourceBundle(ZUP=54)
    assert new_record.outcome.winner == RED
    assert new_record.provenance == {"parent_id": record.record_id, "edit_turn": 0}
    assert new_record.record_id != record.record_id

def test_counterfactual_record_loads(tmp_path):
    record = _seller_buyer_record()
    new_record = counterfactual_rerun(record, 0, _opening(120), _agents(record))
    path = tmp_path / "counterfactual.json"
    save(new_record, str(path))
    assert load(str(path)) == new_record

class WallClockAgent(Agent):
    """
    Plays like the wrapped scripted agent but reports itself as not
    deterministic, as an LLM agent does.
    """
    def __init__(self, inner: Agent):
        super().__init__(inner.spec)
        self.inner = inner

    @property
    def deterministic(self) -> bool:
        return False

    def next_message(self, view: list[dict]) -> str:
        return self.inner.next_message(view)

def test_counterfactual_timestamps(tmp_path):
    """
    A re-run with a non-deterministic agent is stamped with start and
    finish times like a game from run, and the stamps survive saving.
    A scripted re-run has none.

    Raises
    ------
    AssertionError
        If the stamps are missing or present where they should not be.
    """
    record = _seller_buyer_record()
    scripted = counterfactual_rerun(record, 0, _opening(120), _agents(record))
    assert scripted.timestamps == {}

    agents = tuple(WallClockAgent(agent) for agent in _agents(record))
    stamped = counterfactual_rerun(record, 0, _opening(120), agents)
    msg = f"Error in counterfactual timestamps. Expected: ['finished', 'started'], got: {sorted(stamped.timestamps)}."
    assert sorted(stamped.timestamps) == ["finished", "started"], msg
    assert stamped.timestamps["started"] <= stamped.timestamps["finished"]
    assert stamped.record_id != scripted.record_id

    path = tmp_path / "stamped.json"
    save(stamped, str(path))
    assert load(str(path)).timestamps == stamped.timestamps

def test_invalid_edits():
    record = _seller_buyer_record()
    with pytest.raises(InvalidEdit):
        counterfactual_rerun(record, len(record.transcript), _opening(120), _agents(record))

    with pytest.raises(InvalidEdit):
        counterfactual_rerun(record, 0, _opening(120, player=BLUE), _agents(record))

    with pytest.raises(InvalidEdit):
        counterfactual_rerun(record, 0, _opening(500), _agents(record))

def test_manifest(tmp_path):
    append_manifest(str(tmp_path), {"path": "a.json", "status": "ACCEPTED"})
    append_manifest(str(tmp_path), {"path": "b.json", "status": "MAX_TURNS"})
    entries = read_manifest(str(tmp_path))
    assert [entry["path"] for entry in entries] == ["a.json", "b.json"]

if __name__ == "__main__":
    test_version_1_0_record()
    test_counterfactual_opening()
    test_invalid_edits()
