"""Rule-based command parsing.

Extracts three slots from an utterance: the object phrase, an optional
holding part, and who gets that part (robot or human). Tokens are tagged by
lexicon membership, object phrases are longest matches extended over their
adjectives, and the holder is decided by a small cascade of clause-level
rules (gerund agency, self-referent subjects, imperatives, possessive
recipient constructions).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

POSSESSIVE_MARKER = "'s"

# clause boundaries: narrow segments also split on "by", broad ones do not
NARROW_BOUNDARIES = frozenset({"so", "and", "by", "because", "then", ","})
BROAD_BOUNDARIES = frozenset({"so", "and", "because", "then", ","})

POSSESSIVE_PRONOUNS = frozenset({"its", "his", "her", "their"})
FUNCTION_WORDS = frozenset({"to", "can", "could", "would", "will", "please",
                            "over", "up", "out"})


class ParseError(Exception):
    """Raised when an utterance cannot be parsed."""


@dataclass(frozen=True)
class ParsedCommand:
    """(object phrase, holding part, holder) triple plus diagnostics."""

    object_phrase: str
    part: str | None = None
    holder: str = "none"            # "robot" | "human" | "none"
    low_confidence: bool = False
    other_objects: tuple = ()

    def __post_init__(self):
        if not self.object_phrase:
            raise ParseError("object phrase must be non-empty")
        if self.holder not in ("robot", "human", "none"):
            raise ParseError(f"invalid holder {self.holder!r}")
        if self.part is None and self.holder != "none":
            raise ParseError("holder requires a holding part")


@dataclass(frozen=True)
class Lexicon:
    """Vocabulary the parser tags against; unknown words pass through as adjectives."""

    object_nouns: frozenset
    part_nouns: frozenset
    action_verbs: frozenset
    self_referents: frozenset = frozenset({"i", "me", "myself", "my"})
    determiners: frozenset = frozenset({"the", "a", "an", "this", "that",
                                        "these", "those", "some"})

    def __post_init__(self):
        for name in ("object_nouns", "part_nouns", "action_verbs",
                     "self_referents", "determiners"):
            object.__setattr__(self, name,
                               frozenset(w.lower() for w in getattr(self, name)))
        if self.self_referents & self.part_nouns:
            raise ParseError("self referents may not double as part nouns")

    def is_gerund_verb(self, token: str) -> bool:
        if not token.endswith("ing") or len(token) < 5:
            return False
        stems = {token[:-3], token[:-4], token[:-3] + "e"}
        return bool(stems & self.action_verbs)


DEFAULT_OBJECT_NOUNS = (
    # tabletop catalog names and synonyms
    "mug", "coffee mug", "cup", "glass", "bowl", "dish", "flashlight",
    "torch", "banana", "drill", "power drill", "chef can", "fish can", "can",
    "coffee can", "tuna can", "screwdriver", "scissors", "shears", "pear",
    "strawberry", "berry", "clamp", "small clamp", "medium clamp",
    "large clamp", "eraser", "pencil eraser", "rubber",
    # common request vocabulary
    "hammer", "toy plane", "plane", "orange", "mustard bottle", "bottle",
    "frying pan", "pan", "apple", "knife", "spoon", "fork", "plate",
    "remote", "phone", "book", "key", "keys",
)

DEFAULT_PART_NOUNS = (
    "handle", "handles", "tip", "stem", "shaft", "rim", "blade", "blades",
    "grip", "head", "lid", "base", "body", "bit", "hole", "holes", "edge",
    "spout", "neck", "cap", "front", "back",
)

DEFAULT_ACTION_VERBS = (
    "give", "hand", "pass", "deliver", "grab", "hold", "want", "get",
    "bring", "fetch", "take", "pick", "grasp", "need", "retrieve", "send",
)


def default_lexicon() -> Lexicon:
    return Lexicon(object_nouns=frozenset(DEFAULT_OBJECT_NOUNS),
                   part_nouns=frozenset(DEFAULT_PART_NOUNS),
                   action_verbs=frozenset(DEFAULT_ACTION_VERBS))


def tokenize(utterance: str) -> list:
    """Lowercased word tokens; possessive 's becomes its own marker token."""
    text = utterance.lower().replace("'s", f" {POSSESSIVE_MARKER} ")
    return re.findall(r"'s|[a-z]+|,", text)


def _find_object_matches(tokens, lexicon: Lexicon) -> list:
    """All (start, end, phrase) lexicon object matches, longest first per start."""
    matches = []
    phrases = [p.split() for p in lexicon.object_nouns]
    for start in range(len(tokens)):
        best = None
        for words in phrases:
            end = start + len(words)
            if tokens[start:end] == words:
                if best is None or len(words) > best[1] - best[0]:
                    best = (start, end, " ".join(words))
        if best:
            matches.append(best)
    # drop matches nested inside a longer match at an earlier start
    filtered = []
    for m in sorted(matches, key=lambda m: (m[0], -(m[1] - m[0]))):
        if not any(f[0] <= m[0] and m[1] <= f[1] and f != m for f in filtered):
            filtered.append(m)
    return filtered


def _extend_adjectives(tokens, start: int, lexicon: Lexicon) -> int:
    """Pull leading adjectives (unknown words) into the object phrase."""
    known = (lexicon.determiners | lexicon.action_verbs | lexicon.part_nouns
             | lexicon.self_referents | NARROW_BOUNDARIES | FUNCTION_WORDS
             | POSSESSIVE_PRONOUNS | {POSSESSIVE_MARKER})
    while start > 0:
        prev = tokens[start - 1]
        if prev in known or prev in lexicon.object_nouns or not prev.isalpha():
            break
        start -= 1
    return start


def extract_object(utterance: str, lexicon: Lexicon) -> str:
    """Longest known object phrase, with its adjectives, earliest first."""
    if not utterance or not utterance.strip():
        raise ParseError("utterance must be non-empty")
    tokens = tokenize(utterance)
    matches = _find_object_matches(tokens, lexicon)
    if not matches:
        raise ParseError(f"no known object in utterance {utterance!r}")
    start, end, _ = matches[0]
    ext = _extend_adjectives(tokens, start, lexicon)
    return " ".join(tokens[ext:end])


def extract_part(utterance: str, object_phrase: str, lexicon: Lexicon) -> str | None:
    """First part noun outside the object phrase; None when absent."""
    tokens = tokenize(utterance)
    span = _object_span(tokens, object_phrase)
    for i, tok in enumerate(tokens):
        if span and span[0] <= i < span[1]:
            continue
        if tok in lexicon.part_nouns and tok not in lexicon.self_referents:
            return tok
    return None


def _object_span(tokens, object_phrase: str):
    words = object_phrase.split()
    for start in range(len(tokens) - len(words) + 1):
        if tokens[start:start + len(words)] == words:
            return (start, start + len(words))
    return None


def _segment_start(tokens, idx: int, boundaries) -> int:
    for i in range(idx - 1, -1, -1):
        if tokens[i] in boundaries:
            return i + 1
    return 0


def infer_holder(utterance: str, part: str, lexicon: Lexicon) -> tuple:
    """Decide who the named part is for; returns (holder, low_confidence).

    Cascade: a gerund verb acting on the part means the robot was told how to
    grab ("by grabbing the tip"); a self-referent subject of the part's verb
    reserves it for the human ("so I can hold the handle"); a bare imperative
    over the part means the robot ("grab the shaft"); a recipient
    construction with a possessive part keeps it clear for the human ("give
    me the knife by its handle").
    """
    tokens = tokenize(utterance)
    try:
        p_idx = tokens.index(part)
    except ValueError:
        return "robot", True

    narrow_start = _segment_start(tokens, p_idx, NARROW_BOUNDARIES)
    if any(lexicon.is_gerund_verb(t) for t in tokens[narrow_start:p_idx]):
        return "robot", False

    verb_idx = None
    for i in range(p_idx - 1, -1, -1):
        if tokens[i] in lexicon.action_verbs:
            verb_idx = i
            break
    if verb_idx is not None:
        broad_start = _segment_start(tokens, verb_idx, BROAD_BOUNDARIES)
        if any(t in lexicon.self_referents
               for t in tokens[broad_start:verb_idx]):
            return "human", False

    for i in range(max(p_idx - 3, 0), p_idx):
        if tokens[i] in POSSESSIVE_PRONOUNS:
            return "human", False

    if verb_idx is not None:
        return "robot", False
    return "robot", True


def parse(utterance: str, lexicon: Lexicon | None = None) -> ParsedCommand:
    """Full slot extraction; errors for empty input or unknown objects."""
    lexicon = lexicon or default_lexicon()
    object_phrase = extract_object(utterance, lexicon)
    part = extract_part(utterance, object_phrase, lexicon)
    holder = "none"
    low_confidence = False
    if part is not None:
        holder, low_confidence = infer_holder(utterance, part, lexicon)

    tokens = tokenize(utterance)
    span = _object_span(tokens, object_phrase)
    others = []
    for start, end, phrase in _find_object_matches(tokens, lexicon)[1:]:
        if span is None or end <= span[0] or start >= span[1]:
            others.append(phrase)
    return ParsedCommand(object_phrase=object_phrase, part=part,
                         holder=holder, low_confidence=low_confidence,
                         other_objects=tuple(others))


# ---------------------------------------------------------------------------
# lexicon persistence

def lexicon_to_dict(lexicon: Lexicon) -> dict:
    return {
        "object_nouns": sorted(lexicon.object_nouns),
        "part_nouns": sorted(lexicon.part_nouns),
        "action_verbs": sorted(lexicon.action_verbs),
        "self_referents": sorted(lexicon.self_referents),
        "determiners": sorted(lexicon.determiners),
    }


def lexicon_from_dict(data: dict) -> Lexicon:
    return Lexicon(
        object_nouns=frozenset(data["object_nouns"]),
        part_nouns=frozenset(data["part_nouns"]),
        action_verbs=frozenset(data["action_verbs"]),
        self_referents=frozenset(data.get("self_referents",
                                          ("i", "me", "myself", "my"))),
        determiners=frozenset(data.get("determiners",
                                       ("the", "a", "an", "this", "that",
                                        "these", "those", "some"))),
    )


def save_lexicon(lexicon: Lexicon, path) -> None:
    Path(path).write_text(json.dumps(lexicon_to_dict(lexicon), indent=2) + "\n")


def load_lexicon(path) -> Lexicon:
    return lexicon_from_dict(json.loads(Path(path).read_text()))
