from __future__ import annotations
import time, logging, multiprocessing
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Union, Iterable
import numpy as np
from .agents import Agent, next_message, make_agent
from .core import (
    Trade, GameStatus, Outcome, apply_trade, is_feasible, score
)
from .negotiation_exceptions import (
    InvalidMove, RetriesExhausted, ProtocolError, AgentBackendFailure,
    StrategyExhausted
)
from .parameters import RED, BLUE, PLAYERS, DEFAULT_INVALID_MOVE_RETRIES, flags
from .protocol import (
    Decision, StructuredMessage, VisibilityPolicy, DEFAULT_POLICY,
    parse_message, filter_for_opponent, error_notice
)
from .scenarios import ScenarioConfig, render_system_prompt, render_role_message

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class TranscriptEntry:
    player: str
    raw: str
    message: StructuredMessage
    forwarded: str

    def to_dict(self) -> dict:
        return {
            "player": self.player,
            "raw": self.raw,
            "message": self.message.to_dict(),
            "forwarded": self.forwarded,
        }

    @classmethod
    def from_dict(cls, data: dict) -> TranscriptEntry:
        return cls(
            player = data["player"],
            raw = data["raw"],
            message = StructuredMessage.from_dict(data["message"]),
            forwarded = data["forwarded"],
        )

@dataclass(frozen=True)
class InvalidAttempt:
    """
    A rejected reply. notice is the feedback text sent back to the
    agent before it was queried again.
    """
    turn_index: int
    player: str
    raw: str
    error: str
    notice: str

    def to_dict(self) -> dict:
        return {
            "turn_index": self.turn_index,
            "player": self.player,
            "raw": self.raw,
            "error": self.error,
            "notice": self.notice,
        }

    @classmethod
    def from_dict(cls, data: dict) -> InvalidAttempt:
        return cls(**data)

@dataclass
class GameState:
    """
    Mutable state of one running game. Confined to the runner of that
    game.

    Attributes
    ----------
    holdings : dict
        {player: ResourceBundle}. Changes only when a trade is accepted.

    transcript : list[TranscriptEntry]
        Accepted messages. Players strictly alternate and RED authors
        transcript[0].

    standing_proposal : Union[None, Trade]
        Most recent feasible proposal, the only target of an ACCEPT.

    turn_index : int
        Equal to len(transcript).
    """
    config: ScenarioConfig
    holdings: dict
    rng_seed: int = 0
    transcript: list = field(default_factory=list)
    standing_proposal: Union[None, Trade] = None
    turn_index: int = 0
    status: GameStatus = GameStatus.ONGOING
    invalid_attempts: list = field(default_factory=list)
    policy: VisibilityPolicy = DEFAULT_POLICY
    invalid_move_retries: int = DEFAULT_INVALID_MOVE_RETRIES
    forfeited_by: Union[None, str] = None
    abort_reason: Union[None, str] = None

    @classmethod
    def initial(
        cls,
        config: ScenarioConfig,
        seed: int = 0,
        policy: VisibilityPolicy = DEFAULT_POLICY,
        invalid_move_retries: int = DEFAULT_INVALID_MOVE_RETRIES
    ) -> GameState:
        return cls(
            config = config,
            holdings = {player: config.endowments[player] for player in PLAYERS},
            rng_seed = seed,
            policy = policy,
            invalid_move_retries = invalid_move_retries,
        )

    @property
    def current_player(self) -> str:
        return RED if (self.turn_index%2 == 0) else BLUE

def check_end(state: GameState) -> GameStatus:
    """
    Classify the state: ABORTED after a backend failure, FORFEIT after
    exhausted retries, ACCEPTED after an ACCEPT, MAX_TURNS when the turn
    budget is used up, ONGOING otherwise.
    """
    if state.abort_reason is not None:
        return GameStatus.ABORTED

    if state.forfeited_by is not None:
        return GameStatus.FORFEIT

    if state.transcript and (state.transcript[-1].message.decision == Decision.ACCEPT):
        return GameStatus.ACCEPTED

    if state.turn_index >= state.config.turn_budget:
        return GameStatus.MAX_TURNS

    return GameStatus.ONGOING

def conversation_view(state: GameState, player: str) -> list[dict]:
    """
    Chat view of one player, derived from the state.

    RED: system prompt without the role, the role assignment as the
    first user message, then its own replies (assistant) and BLUE's
    forwarded messages (user). BLUE: system prompt with the role, then
    RED's forwarded messages (user) and its own replies (assistant).
    Rejected replies appear as assistant messages followed by the error
    notice the agent received.
    """
    config = state.config
    if player == RED:
        view = [
            {"role": "system", "content": render_system_prompt(config, RED, include_role=False)},
            {"role": "user", "content": render_role_message(config, RED)},
        ]
    else:
        view = [{"role": "system", "content": render_system_prompt(config, BLUE)}]

    def rejected(turn_index: int) -> list[dict]:
        res = []
        for attempt in state.invalid_attempts:
            if (attempt.turn_index == turn_index) and (attempt.player == player):
                res.append({"role": "assistant", "content": attempt.raw})
                res.append({"role": "user", "content": attempt.notice})
        return res

    for turn_index, entry in enumerate(state.transcript):
        if entry.player == player:
            view += rejected(turn_index)
            view.append({"role": "assistant", "content": entry.raw})
        else:
            view.append({"role": "user", "content": entry.forwarded})

    if state.current_player == player:
        view += rejected(state.turn_index)

    return view

def validate_move(state: GameState, message: StructuredMessage):
    """
    Raises
    ------
    InvalidMove
        If the message is authored by the wrong player, proposes an
        infeasible trade, proposes on a decision-only last turn or
        accepts without a standing proposal by the opponent.
    """
    player = state.current_player
    if message.player_name != player:
        msg = f"It is the turn of Player {player}, but the message is signed"
        msg += f" by Player {message.player_name}."
        raise InvalidMove(msg)

    final_turn = state.turn_index == state.config.turn_budget - 1
    if message.trade is not None:
        if final_turn and state.config.variant.final_turn_decision_only:
            msg = "This is the last turn: you can only ACCEPT or REJECT."
            raise InvalidMove(msg)

        if not is_feasible(message.trade, state.holdings[RED], state.holdings[BLUE]):
            msg = f"The trade is not possible: RED holds {state.holdings[RED]}"
            msg += f" and BLUE holds {state.holdings[BLUE]}."
            raise InvalidMove(msg)

    if message.decision == Decision.ACCEPT:
        standing = state.standing_proposal
        if (standing is None) or (standing.proposer == player):
            msg = "There is no proposal of the other player to accept."
            raise InvalidMove(msg)

def read_move(state: GameState, raw: str) -> StructuredMessage:
    """
    Parse and validate one reply. Protocol errors become InvalidMove.
    """
    try:
        message = parse_message(raw, state.config.resources)
    except ProtocolError as err:
        raise InvalidMove(str(err), cause=err) from err

    validate_move(state, message)
    return message

def apply_move(state: GameState, raw: str, message: StructuredMessage) -> GameState:
    """
    Append a validated message and apply its decision.
    """
    player = state.current_player
    forwarded = filter_for_opponent(message, state.policy)
    state.transcript.append(TranscriptEntry(player, raw, message, forwarded))

    if message.decision == Decision.ACCEPT:
        holdings_red, holdings_blue = apply_trade(
            state.standing_proposal, state.holdings[RED], state.holdings[BLUE]
        )
        state.holdings = {RED: holdings_red, BLUE: holdings_blue}

    elif message.trade is not None:
        """
        PROPOSE, or REJECT with a counter-proposal.
        """
        state.standing_proposal = message.trade

    state.turn_index += 1
    state.status = check_end(state)
    return state

def _query_valid_move(state: GameState, agent: Agent) -> tuple[str, StructuredMessage]:
    player = state.current_player
    max_attempts = 1 + state.invalid_move_retries
    for attempt in range(1, max_attempts + 1):
        raw = next_message(agent, conversation_view(state, player))
        try:
            return raw, read_move(state, raw)
        except InvalidMove as err:
            notice = error_notice(err, attempt, max_attempts)
            kind = type(err.cause).__name__ if err.cause is not None else type(err).__name__
            state.invalid_attempts.append(InvalidAttempt(
                turn_index = state.turn_index,
                player = player,
                raw = raw,
                error = f"{kind}: {err.reason}",
                notice = notice,
            ))
            logger.info(f"Invalid move by {player} on turn {state.turn_index} (attempt {attempt}/{max_attempts}): {err.reason}")

    msg = f"Player {player} made {max_attempts} invalid moves on turn {state.turn_index}."
    raise RetriesExhausted(msg)

def step(state: GameState, agents: dict) -> GameState:
    """
    Play one turn.

    The current player's agent receives its conversation view, its
    reply is parsed, validated, filtered and appended. An invalid reply
    is answered with an error notice and the agent is queried again, up
    to state.invalid_move_retries times; after that the player forfeits.

    Parameters
    ----------
    state : GameState
        An ONGOING game. Modified in place.

    agents : dict
        {RED: Agent, BLUE: Agent}.

    Returns
    -------
    state : GameState
        The same object, for chaining.
    """
    if state.status != GameStatus.ONGOING:
        msg = f"Cannot step a game with status {state.status.value}."
        raise ValueError(msg)

    player = state.current_player
    try:
        raw, message = _query_valid_move(state, agents[player])
    except RetriesExhausted as err:
        logger.info(f"{err} Player {player} forfeits.")
        state.forfeited_by = player
        state.status = check_end(state)
        return state

    return apply_move(state, raw, message)

def play(state: GameState, agents: dict) -> GameState:
    """
    Step until the game ends. Backend failures and exhausted scripted
    agents abort the game.
    """
    while state.status == GameStatus.ONGOING:
        try:
            step(state, agents)
        except (AgentBackendFailure, StrategyExhausted) as err:
            state.abort_reason = f"{type(err).__name__}: {err}"
            state.status = check_end(state)
            logger.warning(f"Game aborted on turn {state.turn_index}: {state.abort_reason}")

    return state

def outcome_of(state: GameState) -> Outcome:
    return score(
        scenario_kind = state.config.kind,
        status = state.status,
        initial_holdings = state.config.endowments,
        final_holdings = state.holdings,
        valuations = state.config.valuations,
        forfeited_by = state.forfeited_by,
    )

def replay_transcript(
    config: ScenarioConfig,
    entries: Iterable[TranscriptEntry],
    seed: int = 0,
    policy: VisibilityPolicy = DEFAULT_POLICY,
    invalid_move_retries: int = DEFAULT_INVALID_MOVE_RETRIES
) -> GameState:
    """
    Rebuild a game state from stored transcript entries without asking
    any agent. Every entry is re-parsed and re-validated.

    Raises
    ------
    InvalidMove
        If an entry is not a legal move at its position, or its stored
        parsed / forwarded form disagrees with its raw text.
    """
    state = GameState.initial(config, seed, policy, invalid_move_retries)
    for entry in entries:
        if state.status != GameStatus.ONGOING:
            msg = f"Transcript continues after the game ended on turn {state.turn_index}."
            raise InvalidMove(msg)

        if entry.player != state.current_player:
            msg = f"Turn {state.turn_index} belongs to {state.current_player}, not {entry.player}."
            raise InvalidMove(msg)

        message = read_move(state, entry.raw)
        if message != entry.message:
            msg = f"Stored message on turn {state.turn_index} differs from its raw text."
            raise InvalidMove(msg)

        apply_move(state, entry.raw, message)
        if state.transcript[-1].forwarded != entry.forwarded:
            msg = f"Stored forwarded text on turn {state.turn_index - 1} differs from the filtered message."
            raise InvalidMove(msg)

    return state

def play_timed(state: GameState, agents: dict) -> dict:
    """
    Play the game to the end and return its wall-clock start and finish
    times. Games between deterministic agents get no times.

    Returns
    -------
    : dict
        {"started": ..., "finished": ...} in ISO format, or {}.
    """
    record_timestamps = not all(agent.deterministic for agent in agents.values())
    timestamps = {}
    if record_timestamps:
        timestamps["started"] = datetime.now(timezone.utc).isoformat()

    play(state, agents)

    if record_timestamps:
        timestamps["finished"] = datetime.now(timezone.utc).isoformat()

    return timestamps

def run(
    config: ScenarioConfig,
    agent1: Agent,
    agent2: Agent,
    seed: int = 0,
    policy: VisibilityPolicy = DEFAULT_POLICY,
    invalid_move_retries: int = DEFAULT_INVALID_MOVE_RETRIES
):
    """
    Play a full game and return its GameRecord.

    Parameters
    ----------
    config : ScenarioConfig
        The game.

    agent1 : Agent
        Player 1 (RED). Moves first; the seller in SellerBuyer.

    agent2 : Agent
        Player 2 (BLUE).

    seed : int
        Seed stored with the record.

    Returns
    -------
    : GameRecord
        Identical config, seed and scripted agents give an identical
        record. Wall-clock timestamps are only recorded when an agent is
        not deterministic.
    """
    from .persistence import record_from_state

    run_time = time.perf_counter()  # Debug.
    state = GameState.initial(config, seed, policy, invalid_move_retries)
    timestamps = play_timed(state, {RED: agent1, BLUE: agent2})

    run_time = time.perf_counter() - run_time
    if flags["debug"]:
        logger.debug(f"{run_time = } s")

    return record_from_state(
        state = state,
        agent_specs = (agent1.spec, agent2.spec),
        timestamps = timestamps,
    )

def derive_seed(base_seed: int, *indices: int) -> int:
    """
    Seed of one game, derived from the base seed and its position
    (pair index, game index, ...).
    """
    return int(np.random.SeedSequence([base_seed, *indices]).generate_state(1)[0])

def _play_job(job: list):
    """
    Worker of run_many. job is [config, agent spec 1, agent spec 2,
    seed, policy, invalid move retries].
    """
    config, spec1, spec2, seed, policy, invalid_move_retries = job
    for player, spec in ((RED, spec1), (BLUE, spec2)):
        if (spec.behavior is not None) and (config.behavior.get(player) is None):
            config = config.with_behavior(player, spec.behavior)

    return run(
        config = config,
        agent1 = make_agent(spec1, config, RED),
        agent2 = make_agent(spec2, config, BLUE),
        seed = seed,
        policy = policy,
        invalid_move_retries = invalid_move_retries,
    )

def run_many(
    jobs: list,
    processes: Union[None, int] = None,
    policy: VisibilityPolicy = DEFAULT_POLICY,
    invalid_move_retries: int = DEFAULT_INVALID_MOVE_RETRIES
) -> list:
    """
    Play a batch of games, in parallel if flags["parallel"] is on.

    Parameters
    ----------
    jobs : list
        [(config, agent spec 1, agent spec 2, seed), ...].

    processes : Union[None, int]
        Size of the process pool. None uses every core; 1 plays the
        games serially.

    Returns
    -------
    : list[GameRecord]
        One record per job, in job order.
    """
    parallel_args = [
        [config, spec1, spec2, seed, policy, invalid_move_retries]
        for config, spec1, spec2, seed in jobs
    ]
    run_many_time = time.perf_counter()  # Debug.
    if flags["parallel"] and (processes != 1) and (len(parallel_args) > 1):
        with multiprocessing.Pool(processes=processes) as pool:
            records = pool.map(_play_job, parallel_args)
    else:
        records = [_play_job(args) for args in parallel_args]

    run_many_time = time.perf_counter() - run_many_time
    if flags["debug"]:
        logger.debug(f"{run_many_time = } s for {len(parallel_args)} games")

    return records
