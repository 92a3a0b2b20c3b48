"""
Tagged message format spoken between agents.

Every agent turn is free text containing XML-like tags, one per field
of StructuredMessage:

    <player-name> RED </player-name>
    <turn> 2/ 5 </turn>
    <my-resources> X: 25, Y: 5 </my-resources>
    <my-goal> ... </my-goal>
    <reason> ... </reason>          (private, never forwarded)
    <message> ... </message>
    <trade> Player RED Gives X: 10 | Player BLUE Gives Y: 3 </trade>
    <answer> ACCEPT </answer>

Text outside tags is ignored. Other structured languages can be plugged
in by providing a parse / render pair with the same signatures as
parse_message and render_message.
"""
from __future__ import annotations
import re, logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union, Iterable
from .core import ResourceBundle, Trade
from .negotiation_exceptions import (
    MissingRequiredTag, MalformedTag, MalformedTrade, UnknownResource,
    NonIntegerQuantity, ConflictingDecision, ProtocolError
)
from .parameters import (
    RED, BLUE, PLAYERS, TAGS, MESSAGE_FIELDS, DEFAULT_VISIBLE_FIELDS
)

logger = logging.getLogger(__name__)

class Decision(str, Enum):
    PROPOSE = "PROPOSE"
    ACCEPT = "ACCEPT"
    REJECT = "REJECT"
    NONE = "NONE"

_ANSWERS = (Decision.ACCEPT.value, Decision.REJECT.value, Decision.NONE.value)

@dataclass(frozen=True)
class StructuredMessage:
    """
    One parsed agent turn.

    Attributes
    ----------
    player_name : str
        RED or BLUE.

    turn_echo : tuple[int, int]
        (current, max) as stated by the agent. 1 <= current <= max.

    resources_echo, goal_echo, reasoning, public_text : optional
        State echo, private reasoning and the public message. None
        means the tag was absent; an empty string means an empty tag.

    trade : Union[None, Trade]
        Proposed trade. Present for PROPOSE, optional for REJECT (a
        counter-proposal), absent for ACCEPT and NONE.

    decision : Decision

    warnings : tuple[str, ...]
        Recoverable parser complaints. Not part of equality.
    """
    player_name: str
    turn_echo: tuple
    resources_echo: Union[None, ResourceBundle] = None
    goal_echo: Union[None, str] = None
    reasoning: Union[None, str] = None
    public_text: Union[None, str] = None
    trade: Union[None, Trade] = None
    decision: Decision = Decision.NONE
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.player_name not in PLAYERS:
            msg = f"'player_name' must be in {PLAYERS}! Got '{self.player_name}'."
            raise ValueError(msg)

        object.__setattr__(self, "turn_echo", tuple(self.turn_echo))
        object.__setattr__(self, "decision", Decision(self.decision))
        current, maximum = self.turn_echo
        if not (1 <= current <= maximum):
            msg = f"Turn echo must satisfy 1 <= current <= max. Got {self.turn_echo}."
            raise ValueError(msg)

        if (self.decision == Decision.PROPOSE) and (self.trade is None):
            msg = "A PROPOSE message must carry a trade."
            raise ValueError(msg)

        if (self.decision in (Decision.ACCEPT, Decision.NONE)) and (self.trade is not None):
            msg = f"A {self.decision.value} message cannot carry a trade."
            raise ValueError(msg)

        if (self.trade is not None) and (self.trade.proposer != self.player_name):
            msg = f"Trade proposer '{self.trade.proposer}' differs from"
            msg += f" player_name '{self.player_name}'."
            raise ValueError(msg)

    @property
    def has_new_proposal(self) -> bool:
        return self.trade is not None

    def to_dict(self) -> dict:
        return {
            "player_name": self.player_name,
            "turn_echo": list(self.turn_echo),
            "resources_echo": None if self.resources_echo is None else self.resources_echo.to_dict(),
            "goal_echo": self.goal_echo,
            "reasoning": self.reasoning,
            "public_text": self.public_text,
            "trade": None if self.trade is None else self.trade.to_dict(),
            "decision": self.decision.value,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> StructuredMessage:
        return cls(
            player_name = data["player_name"],
            turn_echo = tuple(data["turn_echo"]),
            resources_echo = None if data["resources_echo"] is None else ResourceBundle(data["resources_echo"]),
            goal_echo = data["goal_echo"],
            reasoning = data["reasoning"],
            public_text = data["public_text"],
            trade = None if data["trade"] is None else Trade.from_dict(data["trade"]),
            decision = Decision(data["decision"]),
            warnings = tuple(data.get("warnings", ())),
        )

@dataclass(frozen=True)
class VisibilityPolicy:
    """
    Set of StructuredMessage fields forwarded to the opponent. The
    player name and the turn echo are always needed for the forwarded
    text to parse again.
    """
    visible_fields: frozenset = DEFAULT_VISIBLE_FIELDS

    def __post_init__(self):
        visible_fields = frozenset(self.visible_fields)
        object.__setattr__(self, "visible_fields", visible_fields)
        if unknown := visible_fields - set(MESSAGE_FIELDS):
            msg = f"Unknown message fields in visibility policy: {sorted(unknown)}."
            msg += f" Allowed: {MESSAGE_FIELDS}."
            raise ValueError(msg)

        if not {"player_name", "turn_echo"} <= visible_fields:
            msg = "'player_name' and 'turn_echo' must be visible."
            raise ValueError(msg)

    @classmethod
    def everything(cls) -> VisibilityPolicy:
        return cls(frozenset(MESSAGE_FIELDS))

DEFAULT_POLICY = VisibilityPolicy()

def _tag_pattern(tag: str) -> re.Pattern:
    return re.compile(
        rf"<\s*{re.escape(tag)}\s*>(.*?)<\s*/\s*{re.escape(tag)}\s*>",
        re.IGNORECASE | re.DOTALL
    )

_TAG_PATTERNS = {name: _tag_pattern(tag) for name, tag in TAGS.items()}
_TURN_PATTERN = re.compile(r"^(\d+)\s*/\s*(\d+)$")
_ITEM_PATTERN = re.compile(r"^([^:]+?)\s*:\s*(\S+)$", re.DOTALL)
_CLAUSE_PATTERN = re.compile(r"^player\s+(.+?)\s+gives\s*(.*)$", re.IGNORECASE | re.DOTALL)
MAX_DIGITS = 4300   # Default limit of int() on decimal strings.
_INTEGER = re.compile(r"^\d+$")
_NEGATIVE_INTEGER = re.compile(r"^-\d+$")
_REAL = re.compile(r"^[-+]?(\d+\.\d*|\.\d+|\d+(\.\d*)?[eE][-+]?\d+)$")

def _extract(raw: str, name: str, warnings: list) -> Union[None, str]:
    matches = _TAG_PATTERNS[name].findall(raw)
    if not matches:
        return None

    if len(matches) > 1:
        msg = f"Tag <{TAGS[name]}> occurs {len(matches)} times; the first one is used."
        logger.warning(msg)
        warnings.append(msg)

    return matches[0].strip()

def _resolve_player(name: str, players: tuple) -> Union[None, str]:
    """
    Map a display name (or RED / BLUE, with or without a 'Player'
    prefix) to RED or BLUE. None if the name is unknown.
    """
    name = re.sub(r"^player\s+", "", name.strip(), flags=re.IGNORECASE).casefold()
    for display_name, player in zip(players, PLAYERS):
        if name == display_name.casefold():
            return player

    for player in PLAYERS:
        if name == player.casefold():
            return player

    return None

def _parse_quantity(name: str, quantity: str) -> int:
    if _INTEGER.match(quantity):
        if len(quantity) > MAX_DIGITS:
            msg = f"Quantity of '{name}' has more than {MAX_DIGITS} digits."
            raise NonIntegerQuantity(msg)

        return int(quantity)

    if _REAL.match(quantity):
        msg = f"Only integer amounts can be traded. Got '{name}: {quantity}'."
        raise NonIntegerQuantity(msg)

    if _NEGATIVE_INTEGER.match(quantity):
        msg = f"Quantities must be non-negative. Got '{name}: {quantity}'."
        raise MalformedTrade(msg)

    msg = f"Could not read quantity of '{name}'. Got '{quantity}'."
    raise MalformedTrade(msg)

def _parse_items(text: str, game_vocab: Iterable[str]) -> ResourceBundle:
    """
    Parse `item ("," item)*` with `item := resource_name ":" integer`,
    or the word `nothing` for the empty list.
    """
    text = text.strip()
    if text.casefold() == "nothing":
        return ResourceBundle()

    if not text:
        msg = "Empty item list. Write 'nothing' to give nothing."
        raise MalformedTrade(msg)

    vocab = {resource.casefold(): resource for resource in game_vocab}
    quantities = {}
    for item in text.split(","):
        match = _ITEM_PATTERN.match(item.strip())
        if match is None:
            msg = f"Item '{item.strip()}' does not have the form 'resource: quantity'."
            raise MalformedTrade(msg)

        name, quantity = match.groups()
        if (resource := vocab.get(name.strip().casefold())) is None:
            msg = f"Unknown resource '{name.strip()}'."
            msg += f" Resources of this game: {sorted(vocab.values())}."
            raise UnknownResource(msg)

        if resource in quantities:
            msg = f"Resource '{resource}' listed twice in '{text}'."
            raise MalformedTrade(msg)

        quantities[resource] = _parse_quantity(resource, quantity)

    return ResourceBundle(quantities)

def _parse_trade(
    body: str,
    game_vocab: Iterable[str],
    players: tuple,
    proposer: str
) -> Trade:
    clauses = body.split("|")
    if len(clauses) != 2:
        msg = "A trade needs exactly two clauses separated by '|'."
        msg += f" Got {len(clauses)} clause(s) in '{body}'."
        raise MalformedTrade(msg)

    sides = {}
    for clause in clauses:
        match = _CLAUSE_PATTERN.match(clause.strip())
        if match is None:
            msg = f"Clause '{clause.strip()}' does not have the form"
            msg += " 'Player <name> Gives <items>'."
            raise MalformedTrade(msg)

        name, items = match.groups()
        if (player := _resolve_player(name, players)) is None:
            msg = f"Unknown player '{name}' in trade clause. Players: {players}."
            raise MalformedTrade(msg)

        if player in sides:
            msg = f"Player {player} appears in both trade clauses."
            raise MalformedTrade(msg)

        sides[player] = _parse_items(items, game_vocab)

    return Trade(from_red=sides[RED], from_blue=sides[BLUE], proposer=proposer)

def parse_message(
    raw: str,
    game_vocab: Iterable[str],
    players: tuple = PLAYERS
) -> StructuredMessage:
    """
    Parse the full text of one agent turn.

    Parameters
    ----------
    raw : str
        Agent reply.

    game_vocab : Iterable[str]
        Resource names of the game. Matched case-insensitively.

    players : tuple
        Display names of (Player 1, Player 2), mapped to (RED, BLUE).
        RED and BLUE are always understood.

    Returns
    -------
    : StructuredMessage

    Raises
    ------
    MissingRequiredTag
        If the player name or the turn tag is absent.

    MalformedTag
        If the player name is unknown or the turn is not 'a/ b' with
        1 <= a <= b.

    MalformedTrade, UnknownResource, NonIntegerQuantity
        If a trade or resource list breaks the item grammar.

    ConflictingDecision
        If the answer is ACCEPT while a new trade is proposed.
    """
    game_vocab = tuple(game_vocab)
    warnings = []
    bodies = {name: _extract(raw, name, warnings) for name in MESSAGE_FIELDS}

    for name in ("player_name", "turn_echo"):
        if bodies[name] is None:
            msg = f"Required tag <{TAGS[name]}> is missing."
            raise MissingRequiredTag(msg)

    if (player_name := _resolve_player(bodies["player_name"], players)) is None:
        msg = f"Unknown player name '{bodies['player_name']}'. Players: {players}."
        raise MalformedTag(msg)

    match = _TURN_PATTERN.match(bodies["turn_echo"])
    if match is None:
        msg = f"Turn must have the form 'current/ max'. Got '{bodies['turn_echo']}'."
        raise MalformedTag(msg)

    if max(len(match.group(1)), len(match.group(2))) > MAX_DIGITS:
        msg = f"Turn numbers have more than {MAX_DIGITS} digits."
        raise MalformedTag(msg)

    turn_echo = (int(match.group(1)), int(match.group(2)))

    if not (1 <= turn_echo[0] <= turn_echo[1]):
        msg = f"Turn must satisfy 1 <= current <= max. Got {turn_echo}."
        raise MalformedTag(msg)

    resources_echo = None
    if bodies["resources_echo"] is not None:
        resources_echo = _parse_items(bodies["resources_echo"], game_vocab)

    trade = None
    if bodies["trade"] is not None:
        trade = _parse_trade(bodies["trade"], game_vocab, players, player_name)

    answer = None
    if bodies["decision"] is not None:
        answer = bodies["decision"].upper()
        if answer not in _ANSWERS:
            msg = f"Answer must be in {_ANSWERS}. Got '{bodies['decision']}'; read as NONE."
            logger.warning(msg)
            warnings.append(msg)
            answer = Decision.NONE.value

    if answer == Decision.ACCEPT.value:
        if trade is not None:
            msg = "A message cannot ACCEPT and propose a new trade at the same time."
            raise ConflictingDecision(msg)

        decision = Decision.ACCEPT

    elif answer == Decision.REJECT.value:
        decision = Decision.REJECT

    else:
        decision = Decision.PROPOSE if trade is not None else Decision.NONE

    return StructuredMessage(
        player_name = player_name,
        turn_echo = turn_echo,
        resources_echo = resources_echo,
        goal_echo = bodies["goal_echo"],
        reasoning = bodies["reasoning"],
        public_text = bodies["public_text"],
        trade = trade,
        decision = decision,
        warnings = tuple(warnings),
    )

def render_trade(trade: Trade) -> str:
    return f"Player {RED} Gives {trade.from_red} | Player {BLUE} Gives {trade.from_blue}"

def _element(name: str, body: str) -> str:
    return f"<{TAGS[name]}> {body} </{TAGS[name]}>"

def render_message(msg: StructuredMessage) -> str:
    """
    Canonical text of a message. parse_message inverts it for every
    message whose text fields are stripped and hold no tag markup.
    PROPOSE and NONE are expressed by the presence / absence of a trade
    and emit no answer tag.
    """
    lines = [
        _element("player_name", msg.player_name),
        _element("turn_echo", f"{msg.turn_echo[0]}/ {msg.turn_echo[1]}"),
    ]
    if msg.resources_echo is not None:
        lines.append(_element("resources_echo", str(msg.resources_echo)))

    for name in ("goal_echo", "reasoning", "public_text"):
        if (body := getattr(msg, name)) is not None:
            lines.append(_element(name, body))

    if msg.trade is not None:
        lines.append(_element("trade", render_trade(msg.trade)))

    if msg.decision in (Decision.ACCEPT, Decision.REJECT):
        lines.append(_element("decision", msg.decision.value))

    return "\n".join(lines)

def visible_part(
    msg: StructuredMessage,
    policy: VisibilityPolicy = DEFAULT_POLICY
) -> StructuredMessage:
    """
    Copy of msg with every field outside the policy cleared.
    """
    changes = {
        name: None for name in MESSAGE_FIELDS
        if (name not in policy.visible_fields) and (name not in ("decision",))
    }
    trade = changes.get("trade", msg.trade)
    if "decision" in policy.visible_fields:
        decision = msg.decision
        if (decision == Decision.PROPOSE) and (trade is None):
            decision = Decision.NONE
    else:
        decision = Decision.PROPOSE if trade is not None else Decision.NONE

    return replace(msg, decision=decision, warnings=(), **changes)

def filter_for_opponent(
    msg: StructuredMessage,
    policy: VisibilityPolicy = DEFAULT_POLICY
) -> str:
    """
    Render only the fields the opponent is allowed to see. Under the
    default policy the reasoning, the resources echo and the goal echo
    are removed.
    """
    return render_message(visible_part(msg, policy))

ERROR_NOTICE_PREFIX = "Your last message was not accepted"

def error_notice(error: Exception, attempt: int, max_attempts: int) -> str:
    """
    Feedback sent to an agent whose reply was rejected.
    """
    kind = type(error).__name__
    reason = getattr(error, "reason", str(error))
    if isinstance(getattr(error, "cause", None), ProtocolError):
        kind = type(error.cause).__name__

    msg = f"{ERROR_NOTICE_PREFIX} ({kind}): {reason}"
    msg += f" This was attempt {attempt} of {max_attempts}."
    msg += " Reply again, using the tags exactly as instructed."
    return msg
