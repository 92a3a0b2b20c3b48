"""
On-disk game records.

One self-describing JSON document per game:

    {
        "format_version": "1.1",
        "record_id": sha1 of the canonical JSON of the game identity,
        "config": ScenarioConfig,
        "agent_specs": [Player 1 spec, Player 2 spec] (secrets removed),
        "seed": int,
        "transcript": [{"player", "raw", "message", "forwarded"}, ...],
        "invalid_attempts": [{"turn_index", "player", "raw", "error", "notice"}, ...],
        "outcome": {"status", "final_holdings", "payoffs", "winner", "forfeited_by"},
        "timestamps": {"started", "finished"} (LLM games only),
        "backend": {"RED": model or scripted strategy, "BLUE": ...},
        "provenance": null or {"parent_id", "edit_turn"},
        "abort_reason": null or text,
        "visible_fields": [...],
        "invalid_move_retries": int
    }

Fractions are stored as "n/d" strings. Holdings are not stored per
turn; they are recomputed from the transcript on load and checked
against the stored outcome.

Version 1.0 lacks invalid_attempts, provenance and backend.
"""
from __future__ import annotations
import os, json, hashlib, tempfile, logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Union
from .agents import AgentSpec
from .core import Outcome, GameStatus, score
from .engine import (
    GameState, TranscriptEntry, InvalidAttempt, replay_transcript, validate_move,
    apply_move, play_timed, outcome_of
)
from .negotiation_exceptions import (
    IoFailure, CorruptRecord, UnsupportedVersion, InvalidEdit, InvalidMove
)
from .parameters import RED, BLUE, PLAYERS, DEFAULT_INVALID_MOVE_RETRIES
from .protocol import StructuredMessage, VisibilityPolicy, DEFAULT_POLICY, render_message
from .scenarios import ScenarioConfig

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1.1"
MANIFEST_NAME = "manifest.jsonl"

class GameEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, Fraction):
            return f"{obj.numerator}/{obj.denominator}"
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, (set, frozenset)):
            return sorted(obj)
        if hasattr(obj, "to_dict"):
            return obj.to_dict()

        return super().default(obj)

def dumps(obj) -> str:
    """
    Canonical JSON text: sorted keys, 2-space indent, trailing newline.
    """
    return json.dumps(obj, cls=GameEncoder, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

def _generate_unique_identifier(identity: dict) -> str:
    """
    sha1 of the canonical JSON of the fields identifying a game.
    """
    canonical = json.dumps(identity, cls=GameEncoder, sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(canonical.encode("utf-8")).hexdigest()

def _backend_of(spec: AgentSpec) -> str:
    if spec.kind == "llm":
        return spec.model

    return f"scripted:{spec.strategy}"

@dataclass
class GameRecord:
    """
    Complete description of one played game.

    Attributes
    ----------
    agent_specs : tuple[AgentSpec, AgentSpec]
        (Player 1, Player 2).

    provenance : Union[None, dict]
        {"parent_id": ..., "edit_turn": ...} for counterfactual
        re-runs, None otherwise.
    """
    config: ScenarioConfig
    agent_specs: tuple
    seed: int
    transcript: tuple
    outcome: Outcome
    invalid_attempts: tuple = ()
    timestamps: dict = field(default_factory=dict)
    backend: dict = field(default_factory=dict)
    provenance: Union[None, dict] = None
    abort_reason: Union[None, str] = None
    visible_fields: tuple = tuple(sorted(DEFAULT_POLICY.visible_fields))
    invalid_move_retries: int = DEFAULT_INVALID_MOVE_RETRIES
    format_version: str = FORMAT_VERSION
    record_id: str = ""

    def __post_init__(self):
        self.agent_specs = tuple(self.agent_specs)
        self.transcript = tuple(self.transcript)
        self.invalid_attempts = tuple(self.invalid_attempts)
        self.visible_fields = tuple(sorted(self.visible_fields))
        if not self.backend:
            self.backend = {
                player: _backend_of(spec) for player, spec in zip(PLAYERS, self.agent_specs)
            }
        if not self.record_id:
            self.record_id = _generate_unique_identifier(self.identity())

    def identity(self) -> dict:
        res = {
            "config": self.config.to_dict(),
            "agent_specs": [spec.to_dict() for spec in self.agent_specs],
            "seed": self.seed,
            "provenance": self.provenance,
        }
        if self.timestamps:
            """
            Repeated LLM games with the same set-up must not share an id.
            """
            res["timestamps"] = self.timestamps

        return res

    @property
    def kind(self) -> str:
        return self.config.kind

    @property
    def aborted(self) -> bool:
        return self.outcome.status == GameStatus.ABORTED

    @property
    def policy(self) -> VisibilityPolicy:
        return VisibilityPolicy(frozenset(self.visible_fields))

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "record_id": self.record_id,
            "config": self.config.to_dict(),
            "agent_specs": [spec.to_dict() for spec in self.agent_specs],
            "seed": self.seed,
            "transcript": [entry.to_dict() for entry in self.transcript],
            "invalid_attempts": [attempt.to_dict() for attempt in self.invalid_attempts],
            "outcome": self.outcome.to_dict(),
            "timestamps": dict(self.timestamps),
            "backend": dict(self.backend),
            "provenance": self.provenance,
            "abort_reason": self.abort_reason,
            "visible_fields": list(self.visible_fields),
            "invalid_move_retries": self.invalid_move_retries,
        }

    @classmethod
    def from_dict(cls, data: dict) -> GameRecord:
        """
        Fields added after version 1.0 get defaults when absent.
        """
        return cls(
            config = ScenarioConfig.from_dict(data["config"]),
            agent_specs = tuple(AgentSpec.from_dict(spec) for spec in data["agent_specs"]),
            seed = data["seed"],
            transcript = tuple(TranscriptEntry.from_dict(entry) for entry in data["transcript"]),
            outcome = Outcome.from_dict(data["outcome"]),
            invalid_attempts = tuple(
                InvalidAttempt.from_dict(attempt) for attempt in data.get("invalid_attempts", [])
            ),
            timestamps = dict(data.get("timestamps", {})),
            backend = dict(data.get("backend", {})),
            provenance = data.get("provenance"),
            abort_reason = data.get("abort_reason"),
            visible_fields = tuple(data.get("visible_fields", sorted(DEFAULT_POLICY.visible_fields))),
            invalid_move_retries = data.get("invalid_move_retries", DEFAULT_INVALID_MOVE_RETRIES),
            format_version = FORMAT_VERSION,
            record_id = data["record_id"],
        )

def record_from_state(
    state: GameState,
    agent_specs: tuple,
    timestamps: Union[None, dict] = None,
    provenance: Union[None, dict] = None
) -> GameRecord:
    """
    Freeze a finished game into a GameRecord.
    """
    return GameRecord(
        config = state.config,
        agent_specs = tuple(agent_specs),
        seed = state.rng_seed,
        transcript = tuple(state.transcript),
        outcome = outcome_of(state),
        invalid_attempts = tuple(state.invalid_attempts),
        timestamps = {} if timestamps is None else dict(timestamps),
        provenance = provenance,
        abort_reason = state.abort_reason,
        visible_fields = tuple(state.policy.visible_fields),
        invalid_move_retries = state.invalid_move_retries,
    )

def save(record: GameRecord, path: str):
    """
    Write a record atomically: the document goes to a temporary file in
    the target directory which then replaces path. An interrupted write
    leaves either the old file or the new one.

    Raises
    ------
    IoFailure
        If the directory cannot be created or the file cannot be
        written.
    """
    text = dumps(record.to_dict())
    directory = os.path.dirname(os.path.abspath(path))
    tmp_path = None
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".json")
        with os.fdopen(fd, "w", encoding="utf-8") as outfile:
            outfile.write(text)
            outfile.flush()
            os.fsync(outfile.fileno())

        os.replace(tmp_path, path)
        tmp_path = None

    except OSError as err:
        msg = f"Could not write game record to '{path}': {err}"
        raise IoFailure(msg) from err

    finally:
        if (tmp_path is not None) and os.path.exists(tmp_path):
            os.remove(tmp_path)

def _check_version(version, path: str):
    if not isinstance(version, str):
        msg = f"Record '{path}' has no valid format_version."
        raise CorruptRecord(msg)

    try:
        major, minor = (int(part) for part in version.split("."))
    except ValueError:
        msg = f"Record '{path}' has a malformed format_version '{version}'."
        raise CorruptRecord(msg)

    current_major, current_minor = (int(part) for part in FORMAT_VERSION.split("."))
    if (major != current_major) or (minor > current_minor):
        msg = f"Record '{path}' has format_version {version}."
        msg += f" Supported: {current_major}.0 to {FORMAT_VERSION}."
        raise UnsupportedVersion(msg)

def check_consistency(record: GameRecord):
    """
    Replay the transcript and compare the re-derived outcome with the
    stored one.

    Raises
    ------
    CorruptRecord
        If the transcript is not a legal game or leads to a different
        outcome.
    """
    try:
        state = replay_transcript(
            config = record.config,
            entries = record.transcript,
            seed = record.seed,
            policy = record.policy,
            invalid_move_retries = record.invalid_move_retries,
        )
    except (InvalidMove, ValueError) as err:
        msg = f"Transcript of record {record.record_id} does not replay: {err}"
        raise CorruptRecord(msg) from err

    stored = record.outcome
    if stored.status in (GameStatus.FORFEIT, GameStatus.ABORTED):
        replayed_status = state.status
        if replayed_status != GameStatus.ONGOING:
            msg = f"Record {record.record_id} is stored as {stored.status.value}"
            msg += f" but its transcript ends with {replayed_status.value}."
            raise CorruptRecord(msg)

        state.status = stored.status

    elif state.status == GameStatus.ONGOING:
        msg = f"Record {record.record_id} is stored as {stored.status.value}"
        msg += " but its transcript does not finish the game."
        raise CorruptRecord(msg)

    expected = score(
        scenario_kind = record.config.kind,
        status = state.status,
        initial_holdings = record.config.endowments,
        final_holdings = state.holdings,
        valuations = record.config.valuations,
        forfeited_by = stored.forfeited_by,
    )
    if expected != stored:
        msg = f"Stored outcome of record {record.record_id} differs from the"
        msg += f" transcript. Expected: {expected.to_dict()}, got: {stored.to_dict()}."
        raise CorruptRecord(msg)

def load(path: str) -> GameRecord:
    """
    Read a record written by save.

    Raises
    ------
    IoFailure
        If the file cannot be read.

    CorruptRecord
        If the file is not valid JSON, lacks fields or its outcome does
        not follow from its transcript.

    UnsupportedVersion
        If the record has another major version or a newer minor
        version.
    """
    try:
        with open(path, "r", encoding="utf-8") as infile:
            content = json.load(infile)
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        msg = f"Record '{path}' is not valid JSON: {err}"
        raise CorruptRecord(msg) from err
    except OSError as err:
        msg = f"Could not read record '{path}': {err}"
        raise IoFailure(msg) from err

    if not isinstance(content, dict):
        msg = f"Record '{path}' must contain a JSON object."
        raise CorruptRecord(msg)

    _check_version(content.get("format_version"), path)
    try:
        record = GameRecord.from_dict(content)
    except (KeyError, TypeError, ValueError, AttributeError) as err:
        msg = f"Record '{path}' has unexpected structure: {type(err).__name__}: {err}"
        raise CorruptRecord(msg) from err

    check_consistency(record)
    return record

def _agent_map(agents) -> dict:
    if isinstance(agents, dict):
        return {RED: agents[RED], BLUE: agents[BLUE]}

    agent1, agent2 = agents
    return {RED: agent1, BLUE: agent2}

def counterfactual_rerun(
    record: GameRecord,
    turn: int,
    replacement: StructuredMessage,
    agents,
    seed: Union[None, int] = None
) -> GameRecord:
    """
    Replay record's turns before turn verbatim, substitute replacement
    at turn and let agents play the rest of the game.

    Parameters
    ----------
    record : GameRecord
        The original game.

    turn : int
        Index of the edited transcript entry, 0 <= turn < len(transcript).

    replacement : StructuredMessage
        The edited message. Must be a legal move at turn.

    agents : Union[dict, tuple]
        {RED: Agent, BLUE: Agent} or (Player 1, Player 2) for the
        remaining turns.

    seed : Union[None, int]
        Seed of the new record. Defaults to the original seed.

    Returns
    -------
    : GameRecord
        New record with provenance {"parent_id", "edit_turn"}.

    Raises
    ------
    InvalidEdit
        If turn is out of range or replacement is illegal at turn.
    """
    if not (0 <= turn < len(record.transcript)):
        msg = f"Edit turn must be in [0, {len(record.transcript) - 1}]. Got {turn}."
        raise InvalidEdit(msg)

    agents = _agent_map(agents)
    seed = record.seed if seed is None else seed
    state = replay_transcript(
        config = record.config,
        entries = record.transcript[:turn],
        seed = seed,
        policy = record.policy,
        invalid_move_retries = record.invalid_move_retries,
    )
    try:
        validate_move(state, replacement)
    except InvalidMove as err:
        msg = f"Replacement message is not a legal move on turn {turn}: {err.reason}"
        raise InvalidEdit(msg) from err

    apply_move(state, render_message(replacement), replacement)
    timestamps = play_timed(state, agents)

    return record_from_state(
        state = state,
        agent_specs = (agents[RED].spec, agents[BLUE].spec),
        timestamps = timestamps,
        provenance = {"parent_id": record.record_id, "edit_turn": turn},
    )

def append_manifest(directory: str, entry: dict):
    """
    Append one line to the manifest of a tournament directory. Only the
    process owning the directory writes to it.
    """
    path = os.path.join(directory, MANIFEST_NAME)
    try:
        with open(path, "a", encoding="utf-8") as outfile:
            outfile.write(json.dumps(entry, cls=GameEncoder, sort_keys=True) + "\n")
    except OSError as err:
        msg = f"Could not append to manifest '{path}': {err}"
        raise IoFailure(msg) from err

def read_manifest(directory: str) -> list[dict]:
    path = os.path.join(directory, MANIFEST_NAME)
    try:
        with open(path, "r", encoding="utf-8") as infile:
            return [json.loads(line) for line in infile if line.strip()]
    except OSError as err:
        msg = f"Could not read manifest '{path}': {err}"
        raise IoFailure(msg) from err
    except json.JSONDecodeError as err:
        msg = f"Manifest '{path}' is corrupt: {err}"
        raise CorruptRecord(msg) from err
