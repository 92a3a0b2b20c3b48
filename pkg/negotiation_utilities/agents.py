from __future__ import annotations
import os, time, logging, math
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from typing import Union
import backoff
import openai
from .core import ResourceBundle, Trade, opponent
from .negotiation_exceptions import (
    BackendTimeout, BackendRejection, StrategyExhausted, UnknownBehavior,
    UnknownStrategy, ProtocolError, ConfigError
)
from .parameters import (
    RED, BLUE, ULTIMATUM, SELLER_BUYER, DOLLARS, ZUP,
    GOOD, OTHER_GOOD, BEHAVIORS, behavior_prompts, DEFAULT_TEMPERATURE,
    DEFAULT_MAX_TOKENS, DEFAULT_TIMEOUT, DEFAULT_RETRIES, DEFAULT_API_KEY_ENV,
    DEFAULT_LOT_SIZE, flags
)
from .protocol import (
    Decision, StructuredMessage, parse_message, render_message, ERROR_NOTICE_PREFIX
)

logger = logging.getLogger(__name__)

AGENT_KINDS = ("llm", "scripted")
STRATEGIES = (
    "rational_ultimatum", "split_difference", "anchor_concede",
    "fixed_sequence", "fairness_threshold", "fixed_offer"
)
_SECRET_MARKERS = ("api_key", "secret", "token", "password")

@dataclass(frozen=True)
class AgentSpec:
    """
    Description of an agent. API keys are never part of a spec: LLM
    agents read them from the environment variable named by
    api_key_env.
    """
    id: str
    kind: str = "scripted"
    model: Union[None, str] = None
    base_url: Union[None, str] = None
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    api_key_env: str = DEFAULT_API_KEY_ENV
    timeout: float = DEFAULT_TIMEOUT
    retries: int = DEFAULT_RETRIES
    strategy: Union[None, str] = None
    params: dict = field(default_factory=dict)
    behavior: Union[None, str] = None

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            msg = f"Agent kind must be in {AGENT_KINDS}! Got '{self.kind}'."
            raise ValueError(msg)

        if not (0 <= self.temperature <= 2):
            msg = f"'temperature' must be in [0, 2]. Got {self.temperature}."
            raise ValueError(msg)

        if self.max_tokens < 1:
            msg = f"'max_tokens' must be at least 1. Got {self.max_tokens}."
            raise ValueError(msg)

        if self.retries < 1:
            msg = f"'retries' must be at least 1. Got {self.retries}."
            raise ValueError(msg)

        if (self.kind == "llm") and not self.model:
            msg = f"LLM agent '{self.id}' needs a model name."
            raise ValueError(msg)

        if self.kind == "scripted":
            if self.strategy not in STRATEGIES:
                msg = f"Strategy of agent '{self.id}' must be in {STRATEGIES}."
                msg += f" Got '{self.strategy}'."
                raise UnknownStrategy(msg)

        if (self.behavior is not None) and (self.behavior not in BEHAVIORS):
            msg = f"Behavior must be in {BEHAVIORS} or None. Got '{self.behavior}'."
            raise UnknownBehavior(msg)

    @property
    def deterministic(self) -> bool:
        return self.kind == "scripted"

    def to_dict(self) -> dict:
        """
        Serializable form with anything that looks like a secret removed
        from the strategy parameters.
        """
        res = asdict(self)
        res["params"] = {
            key: value for key, value in self.params.items()
            if not any(marker in key.lower() for marker in _SECRET_MARKERS)
        }
        if len(res["params"]) != len(self.params):
            logger.warning(f"Secret-like parameters of agent '{self.id}' were not serialized.")

        return res

    @classmethod
    def from_dict(cls, data: dict) -> AgentSpec:
        try:
            return cls(**data)
        except TypeError as err:
            msg = f"Invalid agent spec {data}: {err}"
            raise ConfigError(msg) from err

def apply_behavior(system_prompt: str, behavior_id: Union[None, str], scenario_kind: str) -> str:
    """
    Append the behavior prompt of (behavior_id, scenario_kind) to the
    tail of a system prompt. None leaves the prompt unchanged.

    Raises
    ------
    UnknownBehavior
        If no behavior prompt exists for the pair.
    """
    if behavior_id is None:
        return system_prompt

    if (prompt := behavior_prompts.get((behavior_id, scenario_kind))) is None:
        msg = f"No behavior prompt for ('{behavior_id}', '{scenario_kind}')."
        msg += f" Known behaviors: {BEHAVIORS}."
        raise UnknownBehavior(msg)

    return f"{system_prompt}\n\n{prompt}"

def check_view(view: list[dict]):
    """
    A conversation view starts with a system message, then alternates
    user / assistant and ends with a user message.
    """
    roles = [message["role"] for message in view]
    if (not roles) or (roles[0] != "system"):
        msg = "A conversation view must start with a system message."
        raise ValueError(msg)

    for i, role in enumerate(roles[1:]):
        expected = "user" if (i%2 == 0) else "assistant"
        if role != expected:
            msg = f"Conversation view is not alternating at position {i + 1}:"
            msg += f" expected '{expected}', got '{role}'."
            raise ValueError(msg)

    if roles[-1] != "user":
        msg = "A conversation view must end with a user message."
        raise ValueError(msg)

class Agent:
    """
    Agent interface. Agents hold no memory between calls; everything
    they know about the game is in the conversation view.
    """
    def __init__(self, spec: AgentSpec):
        self.spec = spec

    @property
    def deterministic(self) -> bool:
        return self.spec.deterministic

    def next_message(self, view: list[dict]) -> str:
        raise NotImplementedError

def next_message(agent: Agent, view: list[dict]) -> str:
    """
    Ask an agent for its next raw reply.

    Parameters
    ----------
    agent : Agent
        LLM or scripted agent.

    view : list[dict]
        [{"role": ..., "content": ...}, ...] starting with the agent's
        system prompt and ending with a user message.

    Returns
    -------
    : str
        The raw reply.
    """
    check_view(view)
    return agent.next_message(view)

_clients = {}
_RETRYABLE = (openai.APIConnectionError, openai.RateLimitError)

def _get_client(base_url: Union[None, str], api_key_env: str, timeout: float) -> openai.OpenAI:
    """
    Clients are shared by every agent of the process with the same
    endpoint, key variable and timeout.
    """
    key = (base_url, api_key_env, timeout)
    if key not in _clients:
        api_key = os.getenv(api_key_env)
        if not api_key:
            msg = f"Environment variable '{api_key_env}' with the API key is not set."
            raise BackendRejection(msg)

        _clients[key] = openai.OpenAI(
            api_key = api_key,
            base_url = base_url,
            timeout = timeout,
            max_retries = 0,
        )
    return _clients[key]

class LLMAgent(Agent):
    """
    Agent backed by a chat-completion endpoint. Any server speaking the
    chat-completion schema works; the endpoint is chosen by base_url.
    """
    def __init__(self, spec: AgentSpec, client=None):
        super().__init__(spec)
        self._client = client

    def request_arguments(self, view: list[dict]) -> dict:
        return {
            "model": self.spec.model,
            "messages": [
                {"role": message["role"], "content": message["content"]} for message in view
            ],
            "temperature": self.spec.temperature,
            "max_tokens": self.spec.max_tokens,
        }

    def next_message(self, view: list[dict]) -> str:
        """
        Raises
        ------
        BackendTimeout
            If the endpoint is unreachable or times out on every attempt.

        BackendRejection
            If the endpoint keeps rate limiting or refuses the request.
        """
        client = self._client
        if client is None:
            client = _get_client(self.spec.base_url, self.spec.api_key_env, self.spec.timeout)

        send = backoff.on_exception(
            backoff.expo,
            _RETRYABLE,
            max_tries = self.spec.retries,
            jitter = None,
            logger = logger,
        )(client.chat.completions.create)

        request_time = time.perf_counter()  # Debug.
        try:
            response = send(**self.request_arguments(view))
        except openai.APIConnectionError as err:
            msg = f"Agent '{self.spec.id}' could not reach {self.spec.base_url or 'the default endpoint'}"
            msg += f" after {self.spec.retries} attempt(s): {err}"
            raise BackendTimeout(msg) from err
        except openai.APIStatusError as err:
            msg = f"Agent '{self.spec.id}' request rejected with status"
            msg += f" {getattr(err, 'status_code', '?')}: {err}"
            raise BackendRejection(msg) from err

        request_time = time.perf_counter() - request_time
        if flags["debug"]:
            logger.debug(f"{request_time = } s")

        return response.choices[0].message.content or ""

def _read_view(view: list[dict], resources: tuple) -> tuple[list[StructuredMessage], int]:
    """
    Recover the accepted game history from a conversation view.

    Returns
    -------
    history : list[StructuredMessage]
        Accepted messages of both players in game order.

    n_own_replies : int
        Number of assistant messages in the view, rejected ones
        included.
    """
    history = []
    n_own_replies = 0
    messages = view[1:]
    for i, message in enumerate(messages):
        if message["role"] == "assistant":
            n_own_replies += 1
            rejected = (
                (i + 1 < len(messages)) and
                messages[i + 1]["content"].startswith(ERROR_NOTICE_PREFIX)
            )
            if rejected:
                continue

        try:
            history.append(parse_message(message["content"], resources))
        except ProtocolError:
            """
            Role assignment and error notices are not game messages.
            """
            continue

    return history, n_own_replies

class _Market:
    """
    Reduces a scenario to a single offer value so that the scripted
    strategies are scenario independent.

    SellerBuyer: ZUP that BLUE pays for one X.
    Ultimatum: Dollars RED gives to BLUE.
    ResourceExchange: Y that BLUE pays for a lot of X.
    """
    def __init__(self, config, lot_size: int = DEFAULT_LOT_SIZE):
        self.config = config
        self.kind = config.kind
        self.lot_size = lot_size

    def value_of(self, trade: Trade) -> int:
        if self.kind == SELLER_BUYER:
            return trade.from_blue.get(ZUP)
        elif self.kind == ULTIMATUM:
            return trade.from_red.get(DOLLARS)

        return trade.from_blue.get(OTHER_GOOD)

    def trade_for(self, value: int, proposer: str) -> Trade:
        if self.kind == SELLER_BUYER:
            return Trade(ResourceBundle({GOOD: 1}), ResourceBundle({ZUP: value}), proposer)
        elif self.kind == ULTIMATUM:
            return Trade(ResourceBundle({DOLLARS: value}), ResourceBundle(), proposer)

        return Trade(ResourceBundle({GOOD: self.lot_size}), ResourceBundle({OTHER_GOOD: value}), proposer)

    def prefers_high(self, player: str) -> bool:
        if self.kind == ULTIMATUM:
            return player == BLUE

        return player == RED

    @property
    def max_value(self) -> int:
        """
        Largest value the paying side can afford.
        """
        if self.kind == ULTIMATUM:
            return self.config.endowments[RED].get(DOLLARS)
        elif self.kind == SELLER_BUYER:
            return self.config.endowments[BLUE].get(ZUP)

        return self.config.endowments[BLUE].get(OTHER_GOOD)

    @property
    def units(self) -> int:
        return self.config.endowments[RED].get(DOLLARS)

    def offered_to(self, player: str, value: int) -> int:
        """
        Ultimatum only: Dollars a player ends up with if value is
        accepted.
        """
        return value if player == BLUE else self.units - value

    def default_anchor(self, player: str) -> int:
        if self.kind == SELLER_BUYER:
            valuation = self.config.valuation_of(player)
            if player == RED:
                return math.ceil(Fraction(5*valuation.amount, 2))
            return valuation.amount//3

        elif self.kind == ULTIMATUM:
            return 1 if player == RED else max(self.units - 1, 0)

        return 2*self.lot_size if player == RED else self.lot_size//2

    def default_reservation(self, player: str) -> int:
        if self.kind == SELLER_BUYER:
            return self.config.valuation_of(player).amount
        elif self.kind == ULTIMATUM:
            return self.units//2 if player == RED else 1

        return self.lot_size

    def default_threshold(self) -> int:
        if self.kind == SELLER_BUYER:
            return 5*self.config.scale_factor

        return 1

def _proposals(history: list[StructuredMessage], market: _Market) -> list[tuple[str, int]]:
    return [
        (message.player_name, market.value_of(message.trade))
        for message in history if message.trade is not None
    ]

def _own_last_and_incoming(
    proposals: list[tuple[str, int]],
    player: str
) -> tuple[Union[None, int], Union[None, int]]:
    """
    Own most recent proposal, and the opponent's most recent proposal
    made after it (None if the opponent has not answered with one).
    """
    own_last = None
    incoming = None
    for author, value in proposals:
        if author == player:
            own_last = value
            incoming = None
        else:
            incoming = value

    return own_last, incoming

def _round_midpoint(a: int, b: int, prefers_high: bool) -> int:
    """
    Midpoint of a and b. Halves are rounded away from the interest of
    the proposer: down for a proposer who wants a high value, up for
    one who wants a low value.
    """
    midpoint = Fraction(a + b, 2)
    if midpoint.denominator == 1:
        return int(midpoint)

    return math.floor(midpoint) if prefers_high else math.ceil(midpoint)

def strategy_split_difference(
    proposals: list[tuple[str, int]],
    player: str,
    anchor: int,
    accept_threshold: int,
    prefers_high: bool
) -> tuple[Decision, Union[None, int]]:
    """
    Split-the-difference policy.

    First own turn: propose the anchor. Afterwards accept if the
    incoming proposal is within accept_threshold of the own last one,
    otherwise counter with the rounded midpoint of the two.

    Parameters
    ----------
    proposals : list[tuple[str, int]]
        (author, value) of every proposal so far, in game order.

    player : str
        The deciding player.

    anchor : int
        First proposal.

    accept_threshold : int
        Largest gap between the incoming and the own last proposal that
        is accepted.

    prefers_high : bool
        Whether the player profits from a higher value.

    Returns
    -------
    decision, value : tuple[Decision, Union[None, int]]
        (PROPOSE, value) or (ACCEPT, None).

    Examples
    --------
    >>> strategy_split_difference([(RED, 100), (BLUE, 20)], RED, 100, 5, True)
    (<Decision.PROPOSE: 'PROPOSE'>, 60)
    """
    own_last, incoming = _own_last_and_incoming(proposals, player)
    if own_last is None:
        return Decision.PROPOSE, anchor

    if incoming is None:
        return Decision.PROPOSE, own_last

    if abs(incoming - own_last) <= accept_threshold:
        return Decision.ACCEPT, None

    return Decision.PROPOSE, _round_midpoint(incoming, own_last, prefers_high)

def strategy_anchor_concede(
    proposals: list[tuple[str, int]],
    player: str,
    anchor: int,
    rate: Fraction,
    reservation: int,
    prefers_high: bool
) -> tuple[Decision, Union[None, int]]:
    """
    Start at the anchor and concede rate*|anchor - reservation| per own
    turn, never past the reservation value. Accept any incoming value
    at least as favorable as the next planned proposal.
    """
    rate = Fraction(str(rate)) if isinstance(rate, float) else Fraction(rate)
    if not (0 < rate < 1):
        msg = f"Concession rate must satisfy 0 < rate < 1. Got {rate}."
        raise ValueError(msg)

    if (prefers_high and (reservation > anchor)) or ((not prefers_high) and (reservation < anchor)):
        msg = f"Reservation {reservation} is not on the profitable side of anchor {anchor}."
        raise ValueError(msg)

    k = sum(1 for author, _ in proposals if author == player)
    planned = anchor - k*rate*(anchor - reservation)
    if prefers_high:
        planned = max(math.ceil(planned), reservation)
    else:
        planned = min(math.floor(planned), reservation)

    own_last, incoming = _own_last_and_incoming(proposals, player)
    if incoming is not None:
        favorable = (incoming >= planned) if prefers_high else (incoming <= planned)
        if favorable:
            return Decision.ACCEPT, None

    return Decision.PROPOSE, planned

def strategy_rational_ultimatum(
    player: str,
    units: int,
    turn_index: int,
    turn_budget: int,
    offered: Union[None, int]
) -> tuple[Decision, Union[None, int]]:
    """
    Subgame-perfect ultimatum play.

    The player who proposes on the second to last turn (the proposer
    with the last proposal) asks to keep units - 1. Everyone else
    accepts any positive offer, and the player on the last turn rejects
    an offer of 0.

    Parameters
    ----------
    player : str
        RED or BLUE.

    units : int
        Amount to split.

    turn_index : int
        Index of the current turn, starting at 0.

    turn_budget : int
        Total number of turns.

    offered : Union[None, int]
        What the standing opponent proposal leaves to the player. None
        if there is no such proposal.

    Returns
    -------
    decision, keep : tuple[Decision, Union[None, int]]
        For PROPOSE, keep is the amount the player asks to keep.
    """
    if turn_index == turn_budget - 1:
        if (offered is not None) and (offered > 0):
            return Decision.ACCEPT, None

        return Decision.REJECT, None

    proposer_with_last_proposal = RED if ((turn_budget - 2)%2 == 0) else BLUE
    if player == proposer_with_last_proposal:
        if (offered is not None) and (offered >= units - 1):
            return Decision.ACCEPT, None

    elif (offered is not None) and (offered > 0):
        return Decision.ACCEPT, None

    return Decision.PROPOSE, max(units - 1, 0)

def strategy_fairness_threshold(
    units: int,
    offered: Union[None, int],
    threshold: Fraction,
    final_turn: bool
) -> tuple[Decision, Union[None, int]]:
    """
    Accept iff the offered share of the units is at least threshold.
    Without an acceptable offer, propose an even split (keep
    units//2), or reject on the last turn.
    """
    threshold = Fraction(str(threshold)) if isinstance(threshold, float) else Fraction(threshold)
    if offered is not None:
        share = Fraction(offered, units) if units else Fraction(0)
        if share >= threshold:
            return Decision.ACCEPT, None

    if final_turn:
        return Decision.REJECT, None

    return Decision.PROPOSE, units//2

class ScriptedAgent(Agent):
    """
    Deterministic agent following one of the scripted strategies. The
    reply is a pure function of the scenario, the player and the
    conversation view.

    Strategy parameters
    -------------------
    split_difference : anchor, accept_threshold
    anchor_concede : anchor, rate, reservation
    rational_ultimatum : (none)
    fairness_threshold : threshold
    fixed_offer : amount (defaults to the variant's fixed_offer)
    fixed_sequence : moves, a list of raw texts or of dicts with
        decision, trade ({"from_red": ..., "from_blue": ...}),
        public_text and reasoning.

    All strategies accept reasoning (text of the private reason tag) and
    lot_size (ResourceExchange lot of X).
    """
    def __init__(self, spec: AgentSpec, config, player: str):
        super().__init__(spec)
        self.config = config
        self.player = player
        self.params = dict(spec.params)
        self.market = _Market(config, self.params.get("lot_size", DEFAULT_LOT_SIZE))
        if (spec.strategy in ("rational_ultimatum", "fairness_threshold", "fixed_offer")) and (config.kind != ULTIMATUM):
            msg = f"Strategy '{spec.strategy}' only plays {ULTIMATUM}. Got '{config.kind}'."
            raise UnknownStrategy(msg)

    def _message(
        self,
        own_turn: int,
        decision: Decision,
        value: Union[None, int] = None,
        public_text: Union[None, str] = None
    ) -> StructuredMessage:
        trade = None
        if value is not None:
            value = min(max(value, 0), self.market.max_value)
            trade = self.market.trade_for(value, self.player)

        if public_text is None:
            if decision == Decision.ACCEPT:
                public_text = "I accept your offer."
            elif trade is not None:
                public_text = f"I propose: {render_trade_sentence(trade)}."
            else:
                public_text = "I reject your offer."

        return StructuredMessage(
            player_name = self.player,
            turn_echo = (own_turn, self.config.turns_of(self.player)),
            resources_echo = self.config.endowments[self.player],
            goal_echo = self.config.goals[self.player],
            reasoning = self.params.get("reasoning", f"Following the {self.spec.strategy} strategy."),
            public_text = public_text,
            trade = trade,
            decision = decision,
        )

    def _fixed_sequence_move(self, index: int, own_turn: int) -> str:
        moves = self.params.get("moves", [])
        if index >= len(moves):
            msg = f"Fixed-sequence agent '{self.spec.id}' has no move number {index + 1};"
            msg += f" it was loaded with {len(moves)}."
            raise StrategyExhausted(msg)

        move = moves[index]
        if isinstance(move, str):
            return move

        trade = None
        if move.get("trade") is not None:
            trade = Trade(
                from_red = ResourceBundle(move["trade"].get("from_red", {})),
                from_blue = ResourceBundle(move["trade"].get("from_blue", {})),
                proposer = self.player,
            )

        decision = Decision(move.get("decision", "PROPOSE" if trade is not None else "NONE"))
        message = StructuredMessage(
            player_name = self.player,
            turn_echo = (own_turn, self.config.turns_of(self.player)),
            resources_echo = self.config.endowments[self.player],
            goal_echo = self.config.goals[self.player],
            reasoning = move.get("reasoning", self.params.get("reasoning")),
            public_text = move.get("public_text", ""),
            trade = trade,
            decision = decision,
        )
        return render_message(message)

    def next_message(self, view: list[dict]) -> str:
        history, n_own_replies = _read_view(view, self.config.resources)
        turn_index = len(history)
        own_turn = sum(1 for message in history if message.player_name == self.player) + 1
        final_turn = turn_index == self.config.turn_budget - 1
        decision_only = final_turn and self.config.variant.final_turn_decision_only

        if self.spec.strategy == "fixed_sequence":
            return self._fixed_sequence_move(n_own_replies, own_turn)

        proposals = _proposals(history, self.market)
        prefers_high = self.market.prefers_high(self.player)
        strategy = self.spec.strategy
        offered = None
        if proposals and (proposals[-1][0] != self.player) and (self.config.kind == ULTIMATUM):
            offered = self.market.offered_to(self.player, proposals[-1][1])

        if strategy == "split_difference":
            decision, value = strategy_split_difference(
                proposals = proposals,
                player = self.player,
                anchor = self.params.get("anchor", self.market.default_anchor(self.player)),
                accept_threshold = self.params.get("accept_threshold", self.market.default_threshold()),
                prefers_high = prefers_high,
            )
        elif strategy == "anchor_concede":
            decision, value = strategy_anchor_concede(
                proposals = proposals,
                player = self.player,
                anchor = self.params.get("anchor", self.market.default_anchor(self.player)),
                rate = Fraction(str(self.params.get("rate", "0.25"))),
                reservation = self.params.get("reservation", self.market.default_reservation(self.player)),
                prefers_high = prefers_high,
            )
        elif strategy == "rational_ultimatum":
            decision, keep = strategy_rational_ultimatum(
                player = self.player,
                units = self.market.units,
                turn_index = turn_index,
                turn_budget = self.config.turn_budget,
                offered = offered,
            )
            value = None if keep is None else self._value_for_keep(keep)
        elif strategy == "fairness_threshold":
            decision, keep = strategy_fairness_threshold(
                units = self.market.units,
                offered = offered,
                threshold = Fraction(str(self.params.get("threshold", "0.5"))),
                final_turn = decision_only,
            )
            value = None if keep is None else self._value_for_keep(keep)
        else:
            decision, value = self._fixed_offer(decision_only)

        if decision_only and (decision == Decision.PROPOSE):
            decision, value = Decision.REJECT, None

        return render_message(self._message(own_turn, decision, value))

    def _value_for_keep(self, keep: int) -> int:
        """
        Ultimatum offer value (Dollars RED gives) for keeping keep.
        """
        return self.market.units - keep if self.player == RED else keep

    def _fixed_offer(self, decision_only: bool) -> tuple[Decision, Union[None, int]]:
        """
        Controlled proposer: always offers the decider the same amount.
        """
        amount = self.params.get("amount", self.config.variant.fixed_offer)
        if amount is None:
            msg = f"Agent '{self.spec.id}' has no offer amount and the variant sets none."
            raise ValueError(msg)

        if not (0 <= amount <= self.market.units):
            msg = f"Offer amount must be in [0, {self.market.units}]. Got {amount}."
            raise ValueError(msg)

        if decision_only:
            return Decision.REJECT, None

        decider = opponent(self.player)
        value = amount if decider == BLUE else self.market.units - amount
        return Decision.PROPOSE, value

def render_trade_sentence(trade: Trade) -> str:
    return f"RED gives {trade.from_red}, BLUE gives {trade.from_blue}"

def make_agent(spec: AgentSpec, config, player: str, client=None) -> Agent:
    """
    Instantiate the agent described by spec for one game.
    """
    if spec.kind == "llm":
        return LLMAgent(spec, client=client)

    return ScriptedAgent(spec, config, player)

def controlled_proposer(config, player: str, amount: Union[None, int] = None) -> ScriptedAgent:
    """
    Scripted proposer offering the decider a fixed amount, taken from
    the variant descriptor when amount is None.
    """
    params = {} if amount is None else {"amount": amount}
    spec = AgentSpec(id=f"controlled-{player.lower()}", strategy="fixed_offer", params=params)
    return ScriptedAgent(spec, config, player)
