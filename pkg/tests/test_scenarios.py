import json
import pytest
from negotiation_utilities.core import ResourceBundle, COST_OF_PRODUCTION, WILLINGNESS_TO_PAY
from negotiation_utilities.negotiation_exceptions import InvalidOverride, ConfigError
from negotiation_utilities.parameters import (
    RED, BLUE, RESOURCE_EXCHANGE, ULTIMATUM, SELLER_BUYER, behavior_prompts
)
from negotiation_utilities.scenarios import (
    ScenarioConfig, build, ultimatum_variant, render_system_prompt,
    render_role_message, load_config_file, config_from_file_content
)

def test_default_setups():
    """
    Default endowments, valuations and turn budgets of the three games.

    Raises
    ------
    AssertionError
        If a default differs from the documented set-up.
    """
    config = build(RESOURCE_EXCHANGE)
    assert config.endowments[RED] == ResourceBundle(X=25, Y=5)
    assert config.endowments[BLUE] == ResourceBundle(X=5, Y=25)
    assert config.turn_budget == 16

    config = build(ULTIMATUM)
    assert config.endowments[RED] == ResourceBundle(Dollars=100)
    assert config.endowments[BLUE].is_empty()

    config = build(SELLER_BUYER)
    assert config.endowments[RED] == ResourceBundle(X=1)
    assert config.endowments[BLUE] == ResourceBundle(ZUP=100)
    assert config.valuation_of(RED).amount == 40
    assert config.valuation_of(BLUE).amount == 60
    msg = f"Error in SellerBuyer turn budget. Expected: 20, got: {config.turn_budget}."
    assert config.turn_budget == 20, msg

def test_turns_of_each_player():
    config = build(ULTIMATUM, {"variant": "three_turn"})
    assert config.turn_budget == 3
    assert config.turns_of(RED) == 2
    assert config.turns_of(BLUE) == 1

def test_ultimatum_variants():
    assert ultimatum_variant("classical_2turn").turn_budget == 2
    assert ultimatum_variant("three_turn").turn_budget == 3
    assert ultimatum_variant("multi_turn").turn_budget is None
    assert ultimatum_variant("multi_turn").final_turn_decision_only
    with pytest.raises(InvalidOverride):
        ultimatum_variant("one_turn")

def test_variant_must_fit_kind():
    with pytest.raises(InvalidOverride):
        build(SELLER_BUYER, {"variant": "three_turn"})

@pytest.mark.parametrize("overrides", [
    {"colour": "red"},
    {"endowments": {RED: {"X": -1}}},
    {"endowments": {"GREEN": {"X": 1}}},
    {"max_rounds": 0},
    {"scale": 0},
    {"behavior": {RED: "angry"}},
    {"amount": 10},
])
def test_invalid_overrides(overrides):
    with pytest.raises(InvalidOverride):
        build(SELLER_BUYER, overrides)

def test_scaled_denomination():
    """
    Scaling multiplies currency and valuations and leaves the good
    alone.
    """
    config = build(SELLER_BUYER, {"scale": 100})
    assert config.endowments[BLUE] == ResourceBundle(ZUP=10_000)
    assert config.endowments[RED] == ResourceBundle(X=1)
    assert config.valuation_of(RED).amount == 4000
    assert config.valuation_of(BLUE).amount == 6000

def test_valuation_variants():
    config = build(SELLER_BUYER, {"contrasting": True})
    assert (config.valuation_of(RED).amount, config.valuation_of(BLUE).amount) == (60, 40)

    config = build(SELLER_BUYER, {"over_valued_buyer": True})
    assert config.valuation_of(BLUE).amount == 400

    for seed in range(20):
        config = build(SELLER_BUYER, {"sample_valuations": True}, seed=seed)
        assert 20 <= config.valuation_of(RED).amount <= 40
        assert 60 <= config.valuation_of(BLUE).amount <= 80
        assert config == build(SELLER_BUYER, {"sample_valuations": True}, seed=seed)

    assert config.valuation_of(RED).kind == COST_OF_PRODUCTION
    assert config.valuation_of(BLUE).kind == WILLINGNESS_TO_PAY

def test_prompt_mentions_only_own_valuation():
    """
    The seller's instructions mention the cost but not the buyer's
    willingness to pay, and vice versa.
    """
    config = build(SELLER_BUYER, {"cost": 37, "willingness": 73})
    seller = render_system_prompt(config, RED)
    buyer = render_system_prompt(config, BLUE)
    assert "37" in seller and "73" not in seller
    assert "73" in buyer and "37" not in buyer

def test_prompt_contents():
    config = build(RESOURCE_EXCHANGE)
    prompt = render_system_prompt(config, BLUE)
    for expected in ("<trade>", "<answer>", "<reason>", "X, Y", "at most 16 messages", "You are Player BLUE"):
        msg = f"Error in system prompt. Expected to find: '{expected}'."
        assert expected in prompt, msg

    without_role = render_system_prompt(config, RED, include_role=False)
    assert render_role_message(config, RED) not in without_role

def test_behavior_prompt_is_appended():
    config = build(ULTIMATUM, {"behavior": {BLUE: "desperate"}})
    assert behavior_prompts[("desperate", ULTIMATUM)] in render_system_prompt(config, BLUE)
    assert behavior_prompts[("desperate", ULTIMATUM)] not in render_system_prompt(config, RED)

def test_config_dict():
    config = build(ULTIMATUM, {"variant": "three_turn", "amount": 10, "fixed_offer": 3})
    assert ScenarioConfig.from_dict(json.loads(json.dumps(config.to_dict()))) == config

def test_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({
        "format_version": "1.0",
        "kind": ULTIMATUM,
        "overrides": {"amount": 10},
        "variant": "classical_2turn",
        "behaviors": {BLUE: "cunning"},
        "agents": [{"id": "a", "strategy": "rational_ultimatum"}],
        "num_games": 4,
        "seed": 7,
    }))
    content = load_config_file(str(path))
    assert content["num_games"] == 4
    config = config_from_file_content(content)
    assert config.turn_budget == 2
    assert config.behavior[BLUE] == "cunning"
    assert config.endowments[RED] == ResourceBundle(Dollars=10)

@pytest.mark.parametrize("content", [
    "not json",
    json.dumps({"kind": ULTIMATUM, "colour": 1}),
    json.dumps({"overrides": {}}),
    json.dumps({"format_version": "2.0", "kind": ULTIMATUM}),
])
def test_bad_config_files(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    with pytest.raises(ConfigError):
        load_config_file(str(path))

if __name__ == "__main__":
    test_default_setups()
    test_turns_of_each_player()
    test_ultimatum_variants()
    test_variant_must_fit_kind()
    test_scaled_denomination()
    test_valuation_variants()
    test_prompt_mentions_only_own_valuation()
    test_prompt_contents()
    test_behavior_prompt_is_appended()
    test_config_dict()
