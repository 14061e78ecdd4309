"""Token normalization shared by indexing, ranking, selection, and graph building.

Every module tokenizes through the same function so that overlap scores,
inverted-index lookups, and node-merging keys all agree: tokens are maximal
runs of word characters (underscore excluded, so wiki-style titles split),
normalized to Unicode NFC and lowercased. Punctuation never enters a token
and whitespace handling is implicit in the tokenizer.
"""

from __future__ import annotations

import re
import unicodedata

# Word characters except underscore (so wiki titles split), plus combining
# marks so decomposed accents stay attached to their base letter.
_TOKEN_RE = re.compile(
    r"(?:[^\W_]|[̀-ͯ᪰-᫿᷀-᷿⃐-⃿︠-︯])+",
    re.UNICODE,
)

# Bracket/colon escape markers used by wiki dump "lines" fields; pure markup.
_DUMP_ESCAPES = frozenset({"LRB", "RRB", "LSB", "RSB", "COLON"})

# Fixed function-word list (149 entries). Negation words (not, never, no, ...)
# are deliberately absent: for claim verification they are content.
STOPWORDS = frozenset(
    """
    a about above after again against all am an and any are aren as at be
    because been before being below between both but by can could couldn d
    did didn do does doesn doing don down during each few for from further
    had hadn has hasn have haven having he her here hers herself him himself
    his how i if in into is isn it its itself just ll m ma me mightn more
    most mustn my myself needn now o of off on once only or other our ours
    ourselves out over own re s same shan she should shouldn so some such t
    than that the their theirs them themselves then there these they this
    those through to too under until up ve very was wasn we were weren what
    when where which while who whom why will with wouldn y you your yours
    yourself yourselves
    """.split()
)


def normalize_token(raw: str) -> str:
    return unicodedata.normalize("NFC", raw).lower()


def span_tokenize(text: str) -> list[tuple[str, int, int]]:
    """Return (normalized_token, start, end) triples over ``text``.

    Offsets index the original string, so spans stay valid for highlighting
    and for aligning graph nodes back to encoder tokens.
    """
    out = []
    for m in _TOKEN_RE.finditer(text):
        raw = m.group()
        if raw in _DUMP_ESCAPES:
            continue
        out.append((normalize_token(raw), m.start(), m.end()))
    return out


def tokens(text: str) -> list[str]:
    return [t for t, _, _ in span_tokenize(text)]


def content_tokens(text: str) -> list[str]:
    """Normalized tokens with stopwords removed, source order preserved."""
    return [t for t in tokens(text) if t not in STOPWORDS]


def content_token_set(text: str) -> frozenset[str]:
    return frozenset(content_tokens(text))


def normalize_text(text: str) -> str:
    """Canonical single-space form used as a node-merging key."""
    return " ".join(tokens(text))
