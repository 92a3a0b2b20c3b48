from __future__ import annotations
import json, logging
from dataclasses import dataclass, field, replace
from typing import Union
import numpy as np
from .core import (
    ResourceBundle, Valuation, COST_OF_PRODUCTION, WILLINGNESS_TO_PAY
)
from .negotiation_exceptions import InvalidOverride, ConfigError
from .parameters import (
    RED, BLUE, PLAYERS, RESOURCE_EXCHANGE, ULTIMATUM, SELLER_BUYER,
    SCENARIO_KINDS, DOLLARS, ZUP, GOOD, OTHER_GOOD, TAGS, BEHAVIORS,
    SAMPLED_COST_RANGE, SAMPLED_WILLINGNESS_RANGE, OVER_VALUED_FACTOR,
    CONFIG_FORMAT_VERSION
)

logger = logging.getLogger(__name__)

ULTIMATUM_VARIANTS = ("classical_2turn", "three_turn", "multi_turn")

@dataclass(frozen=True)
class Variant:
    """
    Experimental variant of a scenario.

    Attributes
    ----------
    name : str
        'default' or one of ULTIMATUM_VARIANTS.

    turn_budget : Union[None, int]
        Total number of messages. None means 2 x max_rounds.

    final_turn_decision_only : bool
        The player on the last turn may only ACCEPT or REJECT.

    fixed_offer : Union[None, int]
        Amount a controlled proposer offers to the decider.
    """
    name: str = "default"
    turn_budget: Union[None, int] = None
    final_turn_decision_only: bool = False
    fixed_offer: Union[None, int] = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "turn_budget": self.turn_budget,
            "final_turn_decision_only": self.final_turn_decision_only,
            "fixed_offer": self.fixed_offer,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Variant:
        return cls(**data)

def ultimatum_variant(turns: str) -> Variant:
    """
    Variant descriptor of the ultimatum game.

    classical_2turn: RED proposes once, BLUE accepts or rejects.
    three_turn: RED proposes, BLUE proposes, RED accepts or rejects.
    multi_turn: both players propose for max_rounds rounds.

    In all three, the player on the last turn can only ACCEPT or REJECT.
    """
    if turns not in ULTIMATUM_VARIANTS:
        msg = f"'turns' must be in {ULTIMATUM_VARIANTS}! Got '{turns}'."
        raise InvalidOverride(msg)

    turn_budget = {"classical_2turn": 2, "three_turn": 3, "multi_turn": None}[turns]
    return Variant(name=turns, turn_budget=turn_budget, final_turn_decision_only=True)

@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    endowments: dict
    goals: dict
    valuations: tuple = ()
    max_rounds: int = 8
    variant: Variant = field(default_factory=Variant)
    scale_factor: int = 1
    behavior: dict = field(default_factory=lambda: {RED: None, BLUE: None})
    resources: tuple = ()

    @property
    def turn_budget(self) -> int:
        if self.variant.turn_budget is not None:
            return self.variant.turn_budget

        return 2*self.max_rounds

    def turns_of(self, player: str) -> int:
        """
        Number of messages the player sends if the game runs to the
        turn limit. Player 1 moves on even turn indices.
        """
        return (self.turn_budget + (1 if player == RED else 0))//2

    def valuation_of(self, player: str) -> Union[None, Valuation]:
        for valuation in self.valuations:
            if valuation.player == player:
                return valuation

        return None

    @property
    def currency(self) -> Union[None, str]:
        return {ULTIMATUM: DOLLARS, SELLER_BUYER: ZUP}.get(self.kind)

    def with_behavior(self, player: str, behavior: Union[None, str]) -> ScenarioConfig:
        behaviors = dict(self.behavior)
        behaviors[player] = behavior
        return replace(self, behavior=behaviors)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "endowments": {player: self.endowments[player].to_dict() for player in PLAYERS},
            "goals": dict(self.goals),
            "valuations": [valuation.to_dict() for valuation in self.valuations],
            "max_rounds": self.max_rounds,
            "variant": self.variant.to_dict(),
            "scale_factor": self.scale_factor,
            "behavior": dict(self.behavior),
            "resources": list(self.resources),
        }

    @classmethod
    def from_dict(cls, data: dict) -> ScenarioConfig:
        return cls(
            kind = data["kind"],
            endowments = {
                player: ResourceBundle(data["endowments"][player]) for player in PLAYERS
            },
            goals = dict(data["goals"]),
            valuations = tuple(Valuation.from_dict(val) for val in data["valuations"]),
            max_rounds = data["max_rounds"],
            variant = Variant.from_dict(data["variant"]),
            scale_factor = data["scale_factor"],
            behavior = dict(data["behavior"]),
            resources = tuple(data["resources"]),
        )

"""
Goal templates. The seller's goal keeps the price open-ended: the cost
is stated as a fact about production, not as the asking price.
"""
GOAL_TEMPLATES = {
    RESOURCE_EXCHANGE: {
        RED: "Maximize your total resources.",
        BLUE: "Maximize your total resources.",
    },
    ULTIMATUM: {
        RED: "Split the Dollars with the other player and keep as many as possible.",
        BLUE: "Get as many of the other player's Dollars as possible.",
    },
    SELLER_BUYER: {
        RED: "Sell resources for ZUP. It costed X: {cost} ZUP to produce the resources.",
        BLUE: "Buy resources with ZUP. You are willing to pay at most X: {willingness} ZUP for the resources.",
    },
}
SELF_INTERESTED_BUYER_TAIL = " Keep as much ZUP as possible for yourself."

RULES = {
    RESOURCE_EXCHANGE: (
        "You are playing a trading game against another player. Player RED"
        " and player BLUE each hold resources and can exchange them. On"
        " your turn you can propose a trade, accept the most recent trade"
        " proposed by the other player, or reject it. A trade can only ask"
        " a player for resources that player currently holds. The game"
        " ends as soon as a trade is accepted or when both players have"
        " used all of their turns, in which case nothing is exchanged."
    ),
    ULTIMATUM: (
        "You are playing a splitting game against another player. Player"
        " RED holds Dollars and player BLUE holds none. The players"
        " negotiate how the Dollars are split: a trade states how many"
        " Dollars RED gives to BLUE, and BLUE gives nothing. If a proposed"
        " split is accepted, it stands. If no split has been accepted when"
        " the turns run out, both players get nothing."
    ),
    SELLER_BUYER: (
        "You are playing a selling game against another player. Player RED"
        " is the seller and owns one unit of the object X. Player BLUE is"
        " the buyer and owns ZUP, the currency of this game. A trade"
        " states the price in ZUP that BLUE pays for X. The seller starts"
        " first. The game ends as soon as a trade is accepted or when both"
        " players have used all of their turns, in which case no sale"
        " happens. Each player knows only its own value of the object."
    ),
}

def _tag_specification(config: ScenarioConfig) -> str:
    first_resource = config.resources[0] if config.resources else GOOD
    lines = [
        "Every message you send must contain the following tags:",
        f"<{TAGS['player_name']}> your player name </{TAGS['player_name']}>",
        f"<{TAGS['turn_echo']}> your turn number/ your number of turns </{TAGS['turn_echo']}>",
        f"<{TAGS['resources_echo']}> your current resources </{TAGS['resources_echo']}>",
        f"<{TAGS['goal_echo']}> your goal </{TAGS['goal_echo']}>",
        f"<{TAGS['reasoning']}> your private reasoning, never shown to the other player </{TAGS['reasoning']}>",
        f"<{TAGS['public_text']}> the message the other player reads </{TAGS['public_text']}>",
        f"<{TAGS['trade']}> Player RED Gives <resource>: <quantity>, ... | Player BLUE Gives <resource>: <quantity>, ... </{TAGS['trade']}>",
        f"<{TAGS['decision']}> ACCEPT or REJECT </{TAGS['decision']}>",
        "",
        f"Resources are written as 'name: quantity', for example '{first_resource}: 1'.",
        "Write 'nothing' for a player who gives nothing. Only trade integer amounts.",
        f"To propose a trade, include the {TAGS['trade']} tag and leave out the {TAGS['decision']} tag.",
        f"To accept the other player's most recent trade, answer ACCEPT and do not include a {TAGS['trade']} tag.",
        f"To reject it, answer REJECT; you may include a {TAGS['trade']} tag with a counter-proposal.",
        f"The resources of this game are: {', '.join(config.resources)}.",
    ]
    return "\n".join(lines)

def _turn_rules(config: ScenarioConfig, player: str) -> str:
    msg = f"The game lasts at most {config.turn_budget} messages in total and"
    msg += f" you send at most {config.turns_of(player)} of them. RED moves first."
    if config.variant.final_turn_decision_only:
        msg += " On the last turn of the game the player to move can only"
        msg += " ACCEPT or REJECT the standing trade and cannot propose."

    return msg

def render_role_message(config: ScenarioConfig, player: str) -> str:
    """
    Role assignment of one player: name, endowment and goal.
    """
    msg = f"You are Player {player}.\n"
    msg += f"Your resources: {config.endowments[player]}.\n"
    msg += f"Your goal: {config.goals[player]}"
    return msg

def render_system_prompt(
    config: ScenarioConfig,
    player: str,
    include_role: bool = True
) -> str:
    """
    Full instruction text for one player: rules, tag specification,
    turn budget, the player's role (endowment and goal) and, if set,
    the behavior prompt. Only the player's own valuation is mentioned.

    Parameters
    ----------
    config : ScenarioConfig
        The game.

    player : str
        RED or BLUE.

    include_role : bool
        Include the role assignment. Player 1 receives its role as the
        first user message instead.

    Returns
    -------
    : str
        The system prompt.
    """
    from .agents import apply_behavior

    sections = [
        RULES[config.kind],
        _tag_specification(config),
        _turn_rules(config, player),
    ]
    if include_role:
        sections.append(render_role_message(config, player))

    prompt = "\n\n".join(sections)
    return apply_behavior(prompt, config.behavior.get(player), config.kind)

_OVERRIDE_KEYS = (
    "endowments", "goals", "cost", "willingness", "max_rounds", "variant",
    "scale", "behavior", "amount", "sample_valuations", "over_valued_buyer",
    "contrasting", "resources", "fixed_offer", "self_interested_buyer"
)

def _bundle(value, where: str) -> ResourceBundle:
    try:
        return ResourceBundle(value)
    except (ValueError, TypeError, AttributeError) as err:
        msg = f"Invalid resource bundle in '{where}': {err}"
        raise InvalidOverride(msg) from err

def _non_negative_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or (value < 0):
        msg = f"'{name}' must be a non-negative integer. Got {value!r}."
        raise InvalidOverride(msg)

    return int(value)

def _resolve_variant(kind: str, value) -> Variant:
    if isinstance(value, Variant):
        variant = value
    elif isinstance(value, str):
        if value == "default":
            variant = Variant()
        else:
            variant = ultimatum_variant(value)
    elif isinstance(value, dict):
        try:
            variant = Variant(**value)
        except TypeError as err:
            msg = f"Invalid variant descriptor {value}: {err}"
            raise InvalidOverride(msg) from err
    else:
        msg = f"'variant' must be a name, a dict or a Variant. Got {value!r}."
        raise InvalidOverride(msg)

    if (variant.name in ULTIMATUM_VARIANTS) and (kind != ULTIMATUM):
        msg = f"Variant '{variant.name}' only applies to {ULTIMATUM}. Got kind '{kind}'."
        raise InvalidOverride(msg)

    return variant

def build(
    kind: str,
    overrides: Union[None, dict] = None,
    seed: Union[None, int] = None
) -> ScenarioConfig:
    """
    Build a scenario with the default set-up of the three games and
    apply overrides.

    Defaults
    --------
    ResourceExchange: RED (X: 25, Y: 5), BLUE (X: 5, Y: 25), 8 rounds.
    Ultimatum: RED 100 Dollars, BLUE nothing, 8 rounds.
    SellerBuyer: RED (seller) 1 X with cost 40, BLUE (buyer) 100 ZUP
    with willingness to pay 60, 10 rounds.

    Parameters
    ----------
    kind : str
        One of parameters.SCENARIO_KINDS.

    overrides : Union[None, dict]
        Any of
        endowments : {player: {resource: quantity}}, per player.
        goals : {player: text}.
        cost, willingness : int. SellerBuyer valuations.
        max_rounds : int.
        variant : name, dict or Variant.
        scale : int. Multiply currency endowments and valuations.
        behavior : {player: 'cunning' | 'desperate' | None}.
        amount : int. Ultimatum endowment of RED.
        sample_valuations : bool. cost ~ U{20,40}, willingness ~ U{60,80}.
        over_valued_buyer : bool. willingness = 10 x cost.
        contrasting : bool. cost 60, willingness 40.
        resources : list[str]. Extra resource names.
        fixed_offer : int. Amount a controlled proposer offers.
        self_interested_buyer : bool. Extend the buyer's goal.

    seed : Union[None, int]
        Seed of the generator used when sampling valuations.

    Returns
    -------
    : ScenarioConfig

    Raises
    ------
    InvalidOverride
        On an unknown kind or key, negative quantities or a variant that
        does not fit the kind.
    """
    overrides = {} if overrides is None else dict(overrides)
    if kind not in SCENARIO_KINDS:
        msg = f"'kind' must be in {SCENARIO_KINDS}! Got '{kind}'."
        raise InvalidOverride(msg)

    if unknown := set(overrides) - set(_OVERRIDE_KEYS):
        msg = f"Unknown override(s) {sorted(unknown)}. Allowed: {_OVERRIDE_KEYS}."
        raise InvalidOverride(msg)

    if kind == RESOURCE_EXCHANGE:
        endowments = {RED: ResourceBundle(X=25, Y=5), BLUE: ResourceBundle(X=5, Y=25)}
        resources = [GOOD, OTHER_GOOD]
        max_rounds = 8
    elif kind == ULTIMATUM:
        endowments = {RED: ResourceBundle({DOLLARS: 100}), BLUE: ResourceBundle()}
        resources = [DOLLARS]
        max_rounds = 8
    else:
        endowments = {RED: ResourceBundle({GOOD: 1}), BLUE: ResourceBundle({ZUP: 100})}
        resources = [GOOD, ZUP]
        max_rounds = 10

    if (value := overrides.get("amount")) is not None:
        if kind != ULTIMATUM:
            msg = f"'amount' only applies to {ULTIMATUM}. Got kind '{kind}'."
            raise InvalidOverride(msg)

        endowments[RED] = ResourceBundle({DOLLARS: _non_negative_int(value, "amount")})

    for player, bundle in overrides.get("endowments", {}).items():
        if player not in PLAYERS:
            msg = f"Endowment override for unknown player '{player}'."
            raise InvalidOverride(msg)

        endowments[player] = _bundle(bundle, f"endowments.{player}")

    for name in overrides.get("resources", []):
        if name not in resources:
            resources.append(name)

    for bundle in endowments.values():
        for name in bundle:
            if name not in resources:
                resources.append(name)

    if "max_rounds" in overrides:
        max_rounds = _non_negative_int(overrides["max_rounds"], "max_rounds")
        if max_rounds == 0:
            msg = "'max_rounds' must be positive."
            raise InvalidOverride(msg)

    variant = _resolve_variant(kind, overrides.get("variant", "default"))
    if (value := overrides.get("fixed_offer")) is not None:
        variant = replace(variant, fixed_offer=_non_negative_int(value, "fixed_offer"))

    scale = overrides.get("scale", 1)
    if isinstance(scale, bool) or not isinstance(scale, (int, np.integer)) or (scale < 1):
        msg = f"'scale' must be a positive integer. Got {scale!r}."
        raise InvalidOverride(msg)

    valuations = ()
    if kind == SELLER_BUYER:
        cost, willingness = 40, 60
        if overrides.get("contrasting", False):
            cost, willingness = 60, 40

        if overrides.get("sample_valuations", False):
            rng = np.random.default_rng(seed)
            cost = int(rng.integers(SAMPLED_COST_RANGE[0], SAMPLED_COST_RANGE[1] + 1))
            willingness = int(rng.integers(
                SAMPLED_WILLINGNESS_RANGE[0], SAMPLED_WILLINGNESS_RANGE[1] + 1
            ))

        if "cost" in overrides:
            cost = _non_negative_int(overrides["cost"], "cost")

        if "willingness" in overrides:
            willingness = _non_negative_int(overrides["willingness"], "willingness")

        if overrides.get("over_valued_buyer", False):
            willingness = OVER_VALUED_FACTOR*cost

        valuations = (
            Valuation(player=RED, kind=COST_OF_PRODUCTION, amount=cost*scale),
            Valuation(player=BLUE, kind=WILLINGNESS_TO_PAY, amount=willingness*scale),
        )

    else:
        for key in ("cost", "willingness", "sample_valuations", "over_valued_buyer",
                    "contrasting", "self_interested_buyer"):
            if overrides.get(key):
                msg = f"'{key}' only applies to {SELLER_BUYER}. Got kind '{kind}'."
                raise InvalidOverride(msg)

    currency = {ULTIMATUM: DOLLARS, SELLER_BUYER: ZUP}.get(kind)
    if (scale != 1) and (currency is not None):
        endowments = {
            player: bundle.scaled(scale, names=[currency])
            for player, bundle in endowments.items()
        }

    goals = {}
    for player in PLAYERS:
        template = GOAL_TEMPLATES[kind][player]
        if kind == SELLER_BUYER:
            goals[player] = template.format(
                cost = valuations[0].amount,
                willingness = valuations[1].amount,
            )
        else:
            goals[player] = template

    if overrides.get("self_interested_buyer", False):
        goals[BLUE] += SELF_INTERESTED_BUYER_TAIL

    for player, goal in overrides.get("goals", {}).items():
        if player not in PLAYERS:
            msg = f"Goal override for unknown player '{player}'."
            raise InvalidOverride(msg)

        goals[player] = goal

    behavior = {RED: None, BLUE: None}
    for player, behavior_id in overrides.get("behavior", {}).items():
        if player not in PLAYERS:
            msg = f"Behavior override for unknown player '{player}'."
            raise InvalidOverride(msg)

        if (behavior_id is not None) and (behavior_id not in BEHAVIORS):
            msg = f"Behavior must be in {BEHAVIORS} or None. Got '{behavior_id}'."
            raise InvalidOverride(msg)

        behavior[player] = behavior_id

    return ScenarioConfig(
        kind = kind,
        endowments = endowments,
        goals = goals,
        valuations = valuations,
        max_rounds = max_rounds,
        variant = variant,
        scale_factor = int(scale),
        behavior = behavior,
        resources = tuple(resources),
    )

_CONFIG_FILE_KEYS = (
    "format_version", "kind", "overrides", "variant", "behaviors", "agents",
    "num_games", "seed", "out_dir", "parallel"
)

def load_config_file(path: str) -> dict:
    """
    Read a JSON run / tournament config file.

    The document has a top-level "format_version" (currently "1.0") and
    the keys kind, overrides, variant, behaviors, agents, num_games,
    seed and, optionally, out_dir and parallel. Missing optional keys
    get defaults.

    Raises
    ------
    ConfigError
        If the file cannot be read, is not JSON, has unknown keys, lacks
        'kind' or has an unsupported format version.
    """
    try:
        with open(path, "r") as infile:
            content = json.load(infile)
    except (OSError, json.JSONDecodeError) as err:
        msg = f"Could not read config file '{path}': {err}"
        raise ConfigError(msg) from err

    if not isinstance(content, dict):
        msg = f"Config file '{path}' must contain a JSON object."
        raise ConfigError(msg)

    if unknown := set(content) - set(_CONFIG_FILE_KEYS):
        msg = f"Unknown key(s) {sorted(unknown)} in config file '{path}'."
        msg += f" Allowed: {_CONFIG_FILE_KEYS}."
        raise ConfigError(msg)

    version = str(content.get("format_version", CONFIG_FORMAT_VERSION))
    if version.split(".")[0] != CONFIG_FORMAT_VERSION.split(".")[0]:
        msg = f"Unsupported config format_version '{version}'."
        msg += f" Supported: {CONFIG_FORMAT_VERSION}."
        raise ConfigError(msg)

    if "kind" not in content:
        msg = f"Config file '{path}' lacks the required key 'kind'."
        raise ConfigError(msg)

    res = {
        "format_version": version,
        "kind": content["kind"],
        "overrides": dict(content.get("overrides", {})),
        "variant": content.get("variant"),
        "behaviors": dict(content.get("behaviors", {})),
        "agents": list(content.get("agents", [])),
        "num_games": content.get("num_games"),
        "seed": content.get("seed", 0),
        "out_dir": content.get("out_dir"),
        "parallel": content.get("parallel"),
    }
    return res

def config_from_file_content(content: dict, seed: Union[None, int] = None) -> ScenarioConfig:
    """
    Build the ScenarioConfig described by a loaded config file.
    """
    overrides = dict(content["overrides"])
    if content.get("variant") is not None:
        overrides["variant"] = content["variant"]

    if content.get("behaviors"):
        overrides["behavior"] = dict(content["behaviors"])

    seed = content.get("seed") if seed is None else seed
    try:
        return build(content["kind"], overrides, seed)
    except InvalidOverride as err:
        raise ConfigError(str(err)) from err
