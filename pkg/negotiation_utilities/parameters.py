import logging

flags = {"debug": False, "parallel": True}

def debug_mode(switch):
    if isinstance(switch, bool):
        flags["debug"] = switch
        logging.getLogger("negotiation_utilities").setLevel(
            logging.DEBUG if switch else logging.NOTSET
        )
    else:
        print(f"Invalid debug switch '{switch}'")

def parallel_mode(switch):
    if isinstance(switch, bool):
        flags["parallel"] = switch
    else:
        print(f"Invalid parallel switch '{switch}'")

RED = "RED"
BLUE = "BLUE"
PLAYERS = (RED, BLUE)   # Player 1, Player 2.

RESOURCE_EXCHANGE = "ResourceExchange"
ULTIMATUM = "Ultimatum"
SELLER_BUYER = "SellerBuyer"
SCENARIO_KINDS = (RESOURCE_EXCHANGE, ULTIMATUM, SELLER_BUYER)

DOLLARS = "Dollars"
ZUP = "ZUP"
GOOD = "X"
OTHER_GOOD = "Y"

DEFAULT_TEMPERATURE = 0.7
DEFAULT_MAX_TOKENS = 400
DEFAULT_TIMEOUT = 60
DEFAULT_RETRIES = 3
DEFAULT_API_KEY_ENV = "OPENAI_API_KEY"
DEFAULT_INVALID_MOVE_RETRIES = 3
DEFAULT_GAMES_PER_PAIR = 60
DEFAULT_LOT_SIZE = 10   # Units of X per ResourceExchange lot for scripted agents.

SAMPLED_COST_RANGE = (20, 40)           # Inclusive.
SAMPLED_WILLINGNESS_RANGE = (60, 80)    # Inclusive.
OVER_VALUED_FACTOR = 10

CONFIG_FORMAT_VERSION = "1.0"

"""
Tag names of the wire format, keyed by StructuredMessage field.
"""
TAGS = {
    "player_name": "player-name",
    "turn_echo": "turn",
    "resources_echo": "my-resources",
    "goal_echo": "my-goal",
    "reasoning": "reason",
    "public_text": "message",
    "trade": "trade",
    "decision": "answer",
}
MESSAGE_FIELDS = tuple(TAGS)
DEFAULT_VISIBLE_FIELDS = frozenset([
    "player_name", "turn_echo", "public_text", "trade", "decision"
])

behavior_prompts = {
    ("cunning", RESOURCE_EXCHANGE): "You are cunning and sly in your plan to get more resources. Humiliate your opponent as much as possible. Insult them.",
    ("cunning", ULTIMATUM): "You are cunning and sly in your plan to get more than your opponent. Humiliate your opponent as much as possible. Insult them.",
    ("cunning", SELLER_BUYER): "You are cunning and sly in your plan to spend less ZUP. Humiliate your opponent as much as possible. Insult them.",
    ("desperate", RESOURCE_EXCHANGE): "You must fake being desperate. Supplicate and beg to get more resources.",
    ("desperate", ULTIMATUM): "You must fake being desperate. Supplicate and beg to get more dollars.",
    ("desperate", SELLER_BUYER): "You must fake being desperate. Supplicate and beg to spend less ZUP.",
}
BEHAVIORS = ("cunning", "desperate")

"""
Reported player per scenario in tournament matrices. Rows of every
matrix are Player 2, columns are Player 1.
"""
reported_player = {
    RESOURCE_EXCHANGE: BLUE,
    ULTIMATUM: RED,
    SELLER_BUYER: BLUE,
}
