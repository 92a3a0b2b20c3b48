from fractions import Fraction
from types import SimpleNamespace
import pytest
from negotiation_utilities.agents import (
    AgentSpec, LLMAgent, ScriptedAgent, make_agent, apply_behavior, check_view,
    next_message, strategy_split_difference, strategy_anchor_concede,
    strategy_rational_ultimatum, strategy_fairness_threshold
)
from negotiation_utilities.core import GameStatus
from negotiation_utilities.engine import run
from negotiation_utilities.negotiation_exceptions import (
    BackendTimeout, BackendRejection, UnknownBehavior, UnknownStrategy
)
from negotiation_utilities.parameters import (
    RED, BLUE, ULTIMATUM, SELLER_BUYER, DEFAULT_TEMPERATURE, DEFAULT_MAX_TOKENS
)
from negotiation_utilities.protocol import Decision, parse_message
from negotiation_utilities.scenarios import build

class FakeCompletions:
    def __init__(self, replies: list[str]):
        self.replies = list(replies)
        self.requests = []

    def create(self, **kwargs):
        self.requests.append(kwargs)
        content = self.replies.pop(0)
        return SimpleNamespace(choices=[SimpleNamespace(message=SimpleNamespace(content=content))])

def _fake_client(replies: list[str]):
    return SimpleNamespace(chat=SimpleNamespace(completions=FakeCompletions(replies)))

def test_split_difference_rule():
    """
    Rounded midpoints: down for the seller, up for the buyer.

    Raises
    ------
    AssertionError
        If a decision differs from the expected one.
    """
    cases = [
        ([], RED, (Decision.PROPOSE, 100)),
        ([(RED, 100), (BLUE, 20)], RED, (Decision.PROPOSE, 60)),
        ([(RED, 100), (BLUE, 20), (RED, 60)], BLUE, (Decision.PROPOSE, 40)),
        ([(RED, 120), (BLUE, 20), (RED, 70), (BLUE, 45)], RED, (Decision.PROPOSE, 57)),
        ([(RED, 120), (BLUE, 20), (RED, 70), (BLUE, 45), (RED, 57)], BLUE, (Decision.PROPOSE, 51)),
        ([(RED, 50), (BLUE, 45)], RED, (Decision.ACCEPT, None)),
    ]
    for proposals, player, expected in cases:
        anchor = 100 if player == RED else 20
        calculated = strategy_split_difference(proposals, player, anchor, 5, prefers_high=(player == RED))
        msg = f"Error in split difference after {proposals}. Expected: {expected}, got: {calculated}."
        assert calculated == expected, msg

def test_anchor_concede_rule():
    proposals = []
    expected_seller = [100, 85, 70, 55, 40, 40]
    for k, expected in enumerate(expected_seller):
        decision, value = strategy_anchor_concede(proposals, RED, 100, Fraction(1, 4), 40, True)
        msg = f"Error in concession {k}. Expected: {expected}, got: {value}."
        assert (decision, value) == (Decision.PROPOSE, expected), msg
        proposals += [(RED, value), (BLUE, 0)]

    decision, value = strategy_anchor_concede([(RED, 100), (BLUE, 90)], RED, 100, Fraction(1, 4), 40, True)
    assert decision == Decision.ACCEPT

    with pytest.raises(ValueError):
        strategy_anchor_concede([], RED, 100, Fraction(3, 2), 40, True)

    with pytest.raises(ValueError):
        strategy_anchor_concede([], BLUE, 20, Fraction(1, 4), 10, False)

def test_rational_ultimatum_rule():
    assert strategy_rational_ultimatum(RED, 100, 0, 2, None) == (Decision.PROPOSE, 99)
    assert strategy_rational_ultimatum(BLUE, 100, 1, 2, 1) == (Decision.ACCEPT, None)
    assert strategy_rational_ultimatum(BLUE, 100, 1, 2, 0) == (Decision.REJECT, None)
    assert strategy_rational_ultimatum(BLUE, 10, 1, 3, 1) == (Decision.PROPOSE, 9)

@pytest.mark.parametrize("offered, expected", [
    (2, (Decision.REJECT, None)),
    (3, (Decision.ACCEPT, None)),
    (7, (Decision.ACCEPT, None)),
    (None, (Decision.REJECT, None)),
])
def test_fairness_threshold_rule(offered, expected):
    assert strategy_fairness_threshold(10, offered, Fraction(3, 10), final_turn=True) == expected

def test_agent_spec_validation():
    with pytest.raises(ValueError):
        AgentSpec(id="llm", kind="llm")

    with pytest.raises(ValueError):
        AgentSpec(id="llm", kind="llm", model="m", temperature=3)

    with pytest.raises(UnknownStrategy):
        AgentSpec(id="s", strategy="telepathy")

    with pytest.raises(UnknownBehavior):
        AgentSpec(id="s", strategy="split_difference", behavior="angry")

def test_secrets_are_not_serialized():
    spec = AgentSpec(id="s", strategy="split_difference", params={"anchor": 90, "api_key": "sk-123"})
    assert spec.to_dict()["params"] == {"anchor": 90}
    assert "sk-123" not in str(spec.to_dict())

def test_ultimatum_strategies_need_ultimatum():
    config = build(SELLER_BUYER)
    with pytest.raises(UnknownStrategy):
        make_agent(AgentSpec(id="r", strategy="rational_ultimatum"), config, RED)

def test_apply_behavior():
    prompt = apply_behavior("Rules.", "desperate", ULTIMATUM)
    assert prompt.startswith("Rules.\n\n")
    assert "desperate" in prompt
    assert apply_behavior("Rules.", None, ULTIMATUM) == "Rules."
    with pytest.raises(UnknownBehavior):
        apply_behavior("Rules.", "angry", ULTIMATUM)

def test_check_view():
    check_view([{"role": "system", "content": ""}, {"role": "user", "content": ""}])
    with pytest.raises(ValueError):
        check_view([{"role": "user", "content": ""}])

    with pytest.raises(ValueError):
        check_view([
            {"role": "system", "content": ""},
            {"role": "user", "content": ""},
            {"role": "assistant", "content": ""},
        ])

def test_scripted_reply_parses():
    config = build(SELLER_BUYER)
    agent = make_agent(AgentSpec(id="s", strategy="split_difference"), config, RED)
    assert isinstance(agent, ScriptedAgent)
    view = [{"role": "system", "content": "rules"}, {"role": "user", "content": "You are Player RED."}]
    message = parse_message(next_message(agent, view), config.resources)
    assert message.player_name == RED
    assert message.turn_echo == (1, 10)
    assert message.trade.from_blue.get("ZUP") == 100

def test_llm_request_defaults():
    """
    Requests carry the model, the view and the default sampling
    parameters, and the reply text is returned unchanged.
    """
    spec = AgentSpec(id="llm", kind="llm", model="test-model")
    client = _fake_client(["<player-name> RED </player-name>"])
    agent = make_agent(spec, build(ULTIMATUM), RED, client=client)
    assert isinstance(agent, LLMAgent)
    assert not agent.deterministic

    view = [{"role": "system", "content": "rules"}, {"role": "user", "content": "go"}]
    assert next_message(agent, view) == "<player-name> RED </player-name>"
    request = client.chat.completions.requests[0]
    assert request["model"] == "test-model"
    assert request["messages"] == view
    assert request["temperature"] == DEFAULT_TEMPERATURE == 0.7
    assert request["max_tokens"] == DEFAULT_MAX_TOKENS == 400

def test_llm_game_with_fake_client():
    config = build(ULTIMATUM, {"amount": 10, "variant": "classical_2turn"})
    spec = AgentSpec(id="llm", kind="llm", model="test-model")
    reply = "<player-name> BLUE </player-name><turn> 1/ 1 </turn><reason> fine </reason>"
    reply += "<message> ok </message><answer> ACCEPT </answer>"
    llm = make_agent(spec, config, BLUE, client=_fake_client([reply]))
    red = make_agent(AgentSpec(id="r", strategy="rational_ultimatum"), config, RED)
    record = run(config, red, llm)
    assert record.outcome.status == GameStatus.ACCEPTED
    assert record.backend == {RED: "scripted:rational_ultimatum", BLUE: "test-model"}
    assert set(record.timestamps) == {"started", "finished"}

def test_unreachable_endpoint(monkeypatch):
    """
    An endpoint nobody listens on gives BackendTimeout, and a game
    against it is aborted.
    """
    monkeypatch.setenv("NEGOTIATION_TEST_API_KEY", "not-a-key")
    spec = AgentSpec(
        id = "offline",
        kind = "llm",
        model = "test-model",
        base_url = "http://127.0.0.1:9/v1",
        api_key_env = "NEGOTIATION_TEST_API_KEY",
        timeout = 2,
        retries = 1,
    )
    config = build(ULTIMATUM, {"amount": 10, "variant": "classical_2turn"})
    agent = make_agent(spec, config, RED)
    view = [{"role": "system", "content": "rules"}, {"role": "user", "content": "go"}]
    with pytest.raises(BackendTimeout):
        next_message(agent, view)

    record = run(config, agent, make_agent(AgentSpec(id="r", strategy="rational_ultimatum"), config, BLUE))
    assert record.outcome.status == GameStatus.ABORTED
    assert record.abort_reason.startswith("BackendTimeout")

def test_missing_api_key(monkeypatch):
    monkeypatch.delenv("NEGOTIATION_MISSING_KEY", raising=False)
    spec = AgentSpec(id="nokey", kind="llm", model="m", api_key_env="NEGOTIATION_MISSING_KEY")
    agent = make_agent(spec, build(ULTIMATUM), RED)
    view = [{"role": "system", "content": "rules"}, {"role": "user", "content": "go"}]
    with pytest.raises(BackendRejection):
        next_message(agent, view)

if __name__ == "__main__":
    test_split_difference_rule()
    test_anchor_concede_rule()
    test_rational_ultimatum_rule()
    test_agent_spec_validation()
    test_secrets_are_not_serialized()
    test_ultimatum_strategies_need_ultimatum()
    test_apply_behavior()
    test_check_view()
    test_scripted_reply_parses()
    test_llm_request_defaults()
    test_llm_game_with_fake_client()
