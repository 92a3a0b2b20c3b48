class NegotiationError(Exception):
    """
    Base class of every error raised by negotiation_utilities.
    """

# Protocol.
class ProtocolError(NegotiationError):
    """
    Raise when raw agent text cannot be turned into a StructuredMessage.
    """

class MissingRequiredTag(ProtocolError):
    """
    Raise when the player name or the turn tag is absent.
    """

class MalformedTag(ProtocolError):
    """
    Raise when a tag body (player name, turn) has unexpected syntax.
    """

class MalformedTrade(ProtocolError):
    """
    Raise when a trade clause violates the clause grammar.
    """

class UnknownResource(ProtocolError):
    """
    Raise when a resource name is not part of the game vocabulary.
    """

class NonIntegerQuantity(ProtocolError):
    """
    Raise when a quantity is not an integer.
    """

class ConflictingDecision(ProtocolError):
    """
    Raise when a message both accepts and makes a new proposal.
    """

# Core.
class CoreError(NegotiationError):
    pass

class InfeasibleTrade(CoreError):
    """
    Raise when a trade asks a player for resources it does not hold.
    """

class MissingValuation(CoreError):
    """
    Raise when a SellerBuyer payoff lacks the cost or the willingness
    to pay.
    """

# Engine.
class EngineError(NegotiationError):
    pass

class InvalidMove(EngineError):
    """
    Raise when an agent reply is unparseable or illegal in the current
    game state.
    """
    def __init__(self, reason: str, cause: Exception = None):
        super().__init__(reason)
        self.reason = reason
        self.cause = cause

class RetriesExhausted(EngineError):
    """
    Raise when an agent keeps making invalid moves after every re-query.
    """

# Scenarios.
class ScenarioError(NegotiationError):
    pass

class InvalidOverride(ScenarioError):
    """
    Raise when a scenario override is unknown or has an illegal value.
    """

class ConfigError(ScenarioError):
    """
    Raise when a config file has unexpected structure.
    """

# Agents.
class AgentError(NegotiationError):
    pass

class AgentBackendFailure(AgentError):
    """
    Raise when a chat-completion backend fails after the retry budget.
    """

class BackendTimeout(AgentBackendFailure):
    """
    Raise when the backend cannot be reached or does not answer in time.
    """

class BackendRejection(AgentBackendFailure):
    """
    Raise when the backend refuses the request (rate limit, bad request,
    authentication).
    """

class StrategyExhausted(AgentError):
    """
    Raise when a fixed-sequence agent has no moves left.
    """

class UnknownBehavior(AgentError):
    """
    Raise when a behavior prompt id is not known for the scenario.
    """

class UnknownStrategy(AgentError):
    """
    Raise when a scripted strategy id is not known.
    """

# Analysis.
class AnalysisError(NegotiationError):
    pass

class EmptyInput(AnalysisError):
    pass

class LengthMismatch(AnalysisError):
    pass

class DegenerateInput(AnalysisError):
    """
    Raise when a rank correlation is undefined because one of the
    vectors is constant.
    """

class NoAcceptedSales(AnalysisError):
    pass

class NoEligibleSeries(AnalysisError):
    pass

class EmptyDenominator(AnalysisError):
    pass

class InvalidParams(AnalysisError):
    pass

class InvalidVariant(AnalysisError):
    pass

class EmptyAmounts(AnalysisError):
    pass

class MixedScenarios(AnalysisError):
    """
    Raise when records of different scenario kinds are aggregated
    together.
    """

# Persistence.
class PersistenceError(NegotiationError):
    pass

class IoFailure(PersistenceError):
    pass

class CorruptRecord(PersistenceError):
    """
    Raise when a game record file is truncated, has unexpected structure
    or its stored outcome disagrees with its transcript.
    """

class UnsupportedVersion(PersistenceError):
    pass

class InvalidEdit(PersistenceError):
    """
    Raise when a counterfactual edit is illegal at the edited turn.
    """

# Harness.
class HarnessError(NegotiationError):
    pass

class UnknownExperiment(HarnessError):
    pass

class MissingParam(HarnessError):
    pass

class PartialFailure(HarnessError):
    """
    Raise when some games of a tournament or experiment were aborted.
    """
    def __init__(self, msg: str, aborted: list):
        super().__init__(msg)
        self.aborted = aborted
