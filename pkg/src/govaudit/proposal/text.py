"""Description text: sentence splitting, code-related sentence detection and
intention extraction.

Intention extraction reads a dependency-style parse (``ParsedToken`` with a
head index and an arc label).  The default ``PatternParser`` produces such a
parse from word classes and position alone, so results are deterministic and
need no model download; a full dependency parser can be plugged in through
the ``ParseProvider`` protocol.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable, Protocol, Sequence

# ------------------------------------------------------------------ lexicon


@dataclass(frozen=True)
class Lexicon:
    verbs: frozenset[str]
    canonical: dict[str, str] = field(default_factory=dict)  # word -> group head
    action_words: frozenset[str] = frozenset()  # verbs plus synonyms of verbs

    def canon(self, word: str) -> str:
        return self.canonical.get(word, word)

    def lemma(self, word: str) -> str | None:
        """Base form of ``word`` if it (or an inflection of it) is an action word."""
        w = word.lower()
        for cand in _inflection_candidates(w):
            if cand in self.action_words:
                return cand
        return None


def _inflection_candidates(w: str) -> list[str]:
    out = [w]
    if w.endswith("ies"):
        out.append(w[:-3] + "y")
    if w.endswith("es"):
        out.append(w[:-2])
    if w.endswith("s"):
        out.append(w[:-1])
    if w.endswith("ied"):
        out.append(w[:-3] + "y")
    if w.endswith("ed"):
        out += [w[:-2], w[:-1]]
        if len(w) > 4 and w[-3] == w[-4]:
            out.append(w[:-3])  # transferred -> transfer
    if w.endswith("ing"):
        out += [w[:-3], w[:-3] + "e"]
        if len(w) > 5 and w[-4] == w[-5]:
            out.append(w[:-4])
    return out


def _read_data(name: str) -> dict:
    return json.loads(resources.files("govaudit.data").joinpath(name).read_text(encoding="utf-8"))


def build_lexicon(verbs: Iterable[str], groups: Iterable[Sequence[str]]) -> Lexicon:
    verbs = frozenset(v.lower() for v in verbs)
    canonical: dict[str, str] = {}
    actions = set(verbs)
    for group in groups:
        members = [w.lower() for w in group]
        for w in members:
            canonical.setdefault(w, members[0])
        if verbs.intersection(members):
            actions.update(members)
    return Lexicon(verbs, canonical, frozenset(actions))


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    return build_lexicon(_read_data("verbs.json")["verbs"], _read_data("synonyms.json")["groups"])


# ------------------------------------------------------------------ sentences

_LINK = re.compile(r"!?\[([^\]]*)\]\([^)]*\)")
_FENCE = re.compile(r"^\s*(```|~~~).*$", re.M)
_BLOCK_START = re.compile(r"^\s*(#{1,6}\s+|[-*+]\s+|\d+[.)]\s+|>\s*)")
_ABBREVIATIONS = {
    "e.g", "i.e", "etc", "vs", "mr", "mrs", "ms", "dr", "no", "inc", "ltd", "approx",
    "est", "fig", "al", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept",
    "oct", "nov", "dec", "u.s", "st", "co", "corp",
}


def strip_markdown(text: str) -> str:
    text = _LINK.sub(r"\1", text)
    text = _FENCE.sub("", text)
    text = re.sub(r"`([^`]*)`", r"\1", text)
    text = re.sub(r"(\*\*|__)(.+?)\1", r"\2", text)
    return text


def _blocks(text: str) -> list[str]:
    """Paragraphs, with headings and list items kept as blocks of their own."""
    blocks: list[str] = []
    current: list[str] = []
    for line in text.splitlines():
        if not line.strip():
            if current:
                blocks.append(" ".join(current))
                current = []
            continue
        m = _BLOCK_START.match(line)
        if m:
            if current:
                blocks.append(" ".join(current))
            current = [line[m.end():].strip()]
            if m.group(1).lstrip().startswith("#"):
                blocks.append(" ".join(current))
                current = []
        else:
            current.append(line.strip())
    if current:
        blocks.append(" ".join(current))
    return [b for b in blocks if b.strip()]


def _is_boundary(block: str, i: int) -> bool:
    """Is the terminal mark at ``block[i]`` the end of a sentence?"""
    j = i + 1
    if j < len(block) and block[j] in "\"')]":
        j += 1
    if j >= len(block) or not block[j].isspace():
        return False
    rest = block[j:].lstrip()
    if not rest or not (rest[0].isupper() or rest[0].isdigit() or rest[0] in "\"'([#$"):
        return False
    if block[i] != ".":
        return True
    if i > 0 and block[i - 1] == ".":
        return False  # ellipsis
    word = re.search(r"([A-Za-z.]+)$", block[:i])
    if word:
        w = word.group(1).lower().strip(".")
        if w in _ABBREVIATIONS or (len(w) == 1 and w.isalpha()):
            return False
    return True


def split_sentences(description: str) -> list[str]:
    """Ordered sentences covering all visible text of ``description``."""
    out = []
    for block in _blocks(strip_markdown(description)):
        start = 0
        for i, ch in enumerate(block):
            if ch in ".!?" and _is_boundary(block, i):
                end = i + 1
                while end < len(block) and block[end] in "\"')]":
                    end += 1
                piece = block[start:end].strip()
                if piece:
                    out.append(piece)
                start = end
        piece = block[start:].strip()
        if piece:
            out.append(piece)
    return out


# ------------------------------------------------------------------ tokens

ADDRESS_RE = r"0x[0-9a-fA-F]{2,}(?:(?:\.\.\.|…)[0-9a-fA-F]*)?"
_TOKEN = re.compile(
    rf"(?P<addr>{ADDRESS_RE})"
    r"|(?P<func>[A-Za-z_][A-Za-z0-9_]*(?=\())"
    r"|(?P<num>\d[\d,_]*(?:\.\d+)?(?:[kKmMbB](?![A-Za-z]))?%?)"
    r"|(?P<word>[A-Za-z][A-Za-z0-9_]*(?:'[a-z]+)?)"
    r"|(?P<punct>[^\sA-Za-z0-9])"
)

DETERMINERS = {
    "the", "a", "an", "this", "that", "these", "those", "our", "its", "their", "his",
    "her", "my", "your", "all", "each", "every", "some", "any", "another", "such",
}
ADPOSITIONS = {
    "to", "from", "of", "for", "in", "on", "at", "by", "with", "into", "onto", "via",
    "per", "as", "over", "under", "than", "between", "through", "towards", "toward",
    "within", "across", "after", "before", "upon", "about", "against", "until",
}
PRONOUNS = {"we", "it", "they", "i", "you", "he", "she", "us", "them", "which", "who", "what"}
AUXILIARIES = {
    "will", "would", "shall", "should", "can", "could", "may", "might", "must", "is",
    "are", "be", "been", "being", "was", "were", "do", "does", "did", "has", "have",
    "had", "please", "also", "then", "now", "just", "only",
}
CONJUNCTIONS = {"and", "or", "but", "nor", "so", "while", "whereas", "plus"}
NEGATIONS = {
    "not", "no", "never", "cannot", "don't", "doesn't", "won't", "can't", "shouldn't",
    "mustn't", "isn't", "aren't", "wouldn't", "didn't", "nor", "neither", "n't",
}
ADJECTIVES = {
    "new", "old", "current", "additional", "total", "initial", "maximum", "minimum",
    "following", "previous", "proposed", "existing", "remaining", "same", "other",
    "first", "second", "final", "annual", "monthly", "weekly", "daily", "extra",
}
NOUN_POS = {"NOUN", "PROPN", "NUM", "X"}


@dataclass(frozen=True)
class ParsedToken:
    """One token of a dependency-style parse; ``head`` is -1 for a root."""

    index: int
    text: str
    lemma: str
    pos: str
    dep: str = "dep"
    head: int = -1
    kind: str = "word"  # word | number | address | func | punct


class ParseProvider(Protocol):
    def parse(self, sentence: str) -> list[ParsedToken]: ...


def tokenize(sentence: str) -> list[tuple[str, str]]:
    """``(kind, text)`` pairs; ``kind`` is one of address, func, number, word, punct."""
    out = []
    for m in _TOKEN.finditer(sentence):
        kind = m.lastgroup
        out.append(({"addr": "address", "num": "number"}.get(kind, kind), m.group()))
    return out


def _is_symbol(text: str) -> bool:
    return text.isupper() and len(text) >= 2 and any(c.isalpha() for c in text)


def _is_camel(text: str) -> bool:
    return bool(re.search(r"[a-z][A-Z]", text))


class PatternParser:
    """Deterministic parse from word classes and order.

    Arcs produced: ``ROOT``/``conj`` for action verbs (one per verb clause),
    ``dobj`` for the head of the first noun phrase after the verb,
    ``compound`` for capitalised tokens next to that head, ``neg`` for a
    negation in front of the verb, ``dep`` for everything else.
    """

    def __init__(self, lexicon: Lexicon | None = None):
        self.lexicon = lexicon or default_lexicon()

    def _tag(self, toks: list[tuple[str, str]]) -> list[tuple[str, str, str]]:
        tagged = []
        prev_lower = None
        for pos_i, (kind, text) in enumerate(toks):
            low = text.lower()
            if kind == "address" or kind == "func":
                tag, lemma = "X", text
            elif kind == "number":
                tag, lemma = "NUM", text
            elif kind == "punct":
                tag, lemma = "PUNCT", text
            elif low in NEGATIONS:
                tag, lemma = "PART", low
            elif low in DETERMINERS:
                tag, lemma = "DET", low
            elif low in ADPOSITIONS:
                tag, lemma = "ADP", low
            elif low in PRONOUNS:
                tag, lemma = "PRON", low
            elif low in AUXILIARIES:
                tag, lemma = "AUX", low
            elif low in CONJUNCTIONS:
                tag, lemma = "CCONJ", low
            elif low in ADJECTIVES:
                tag, lemma = "ADJ", low
            else:
                verb = self.lexicon.lemma(low)
                # "the transfer of", "a new vote", "of voting" read as nouns
                nominal = prev_lower in DETERMINERS or prev_lower in ADJECTIVES or prev_lower in {"of", "for"}
                # so does a capitalised word continuing a name ("Build Finance")
                prev = toks[pos_i - 1] if pos_i else None
                nominal = nominal or (text[0].isupper() and prev is not None and prev[0] == "word" and prev[1][0].isupper())
                if verb is not None and not nominal and not _is_symbol(text):
                    tag, lemma = "VERB", verb
                elif _is_symbol(text) or _is_camel(text) or (text[0].isupper() and pos_i > 0):
                    tag, lemma = "PROPN", text
                else:
                    tag, lemma = "NOUN", low
            tagged.append((text, lemma, tag))
            prev_lower = low
        return tagged

    def parse(self, sentence: str) -> list[ParsedToken]:
        toks = tokenize(sentence)
        tagged = self._tag(toks)
        n = len(tagged)
        # verbs that only introduce another verb ("proposes to transfer", "propose transferring")
        verbs = []
        for i, (_, _, tag) in enumerate(tagged):
            if tag != "VERB":
                continue
            nxt = tagged[i + 1] if i + 1 < n else None
            nxt2 = tagged[i + 2] if i + 2 < n else None
            if nxt and nxt[2] == "VERB" and nxt[0].lower().endswith("ing"):
                continue
            if nxt and nxt[0].lower() == "to" and nxt2 and nxt2[2] == "VERB":
                continue
            verbs.append(i)

        dep = ["dep"] * n
        head = [-1] * n
        if not verbs:
            return [ParsedToken(i, t, l, p, "dep", -1, k) for i, ((t, l, p), (k, _)) in enumerate(zip(tagged, toks))]
        root = verbs[0]
        bounds = verbs[1:] + [n]
        clause_start = 0
        for v, end in zip(verbs, bounds):
            dep[v] = "ROOT" if v == root else "conj"
            head[v] = -1 if v == root else root
            for j in range(clause_start, end):
                if j != v:
                    head[j] = v
            # negation in front of the verb, within its clause
            for j in range(clause_start, v):
                if tagged[j][2] == "PART":
                    dep[j] = "neg"
            # first noun phrase after the verb
            j = v + 1
            while j < end and tagged[j][2] in {"DET", "ADJ", "AUX", "PART"}:
                j += 1
            np_start = j
            while j < end and tagged[j][2] in {"NOUN", "PROPN", "NUM", "X", "ADJ"}:
                j += 1
            np = [k for k in range(np_start, j) if tagged[k][2] in {"NOUN", "PROPN", "X"}]
            if np:
                obj = np[-1]
                dep[obj] = "dobj"
                head[obj] = v
                k = obj - 1
                while k >= np_start and tagged[k][2] == "PROPN":
                    dep[k], head[k] = "compound", obj
                    k -= 1
                k = obj + 1
                while k < end and tagged[k][2] == "PROPN":
                    dep[k], head[k] = "compound", obj
                    k += 1
            clause_start = end
        return [
            ParsedToken(i, t, l, p, dep[i], head[i], k)
            for i, ((t, l, p), (k, _)) in enumerate(zip(tagged, toks))
        ]


# ------------------------------------------------------------------ classification

SentenceClassifier = Callable[[str], bool]


def heuristic_code_related(
    sentence: str,
    lexicon: Lexicon | None = None,
    symbols: Iterable[str] = (),
) -> bool:
    """An action verb together with an address, number, call or contract symbol."""
    lexicon = lexicon or default_lexicon()
    toks = tokenize(sentence)
    known = {s.lower() for s in symbols if s}
    has_verb = any(tag == "VERB" for _, _, tag in PatternParser(lexicon)._tag(toks))
    if not has_verb:
        return False
    for kind, text in toks:
        if kind in ("address", "number", "func"):
            return True
        if kind == "word" and (_is_symbol(text) or _is_camel(text) or text.lower() in known):
            return True
    return False


def classify_code_related(
    sentence: str,
    classifier: SentenceClassifier | None = None,
    symbols: Iterable[str] = (),
) -> bool:
    if classifier is not None:
        return bool(classifier(sentence))
    return heuristic_code_related(sentence, symbols=symbols)


# ------------------------------------------------------------------ intentions


@dataclass(frozen=True)
class DescriptionIntention:
    action: tuple[str, ...]
    target_object: tuple[str, ...]
    parameters: tuple[str, ...]
    negative: bool
    source_sentence: str

    def words(self) -> tuple[str, ...]:
        return self.action + self.target_object + self.parameters

    def text(self) -> str:
        return " ".join(self.words())

    def to_dict(self) -> dict:
        return {
            "action": list(self.action),
            "targetObject": list(self.target_object),
            "parameters": list(self.parameters),
            "negative": self.negative,
            "sourceSentence": self.source_sentence,
        }


def _clause_of(tokens: Sequence[ParsedToken], i: int, verbs: set[int]) -> int | None:
    seen = set()
    while i not in verbs:
        if i in seen or tokens[i].head < 0:
            return None
        seen.add(i)
        i = tokens[i].head
    return i


def extract_intentions(
    sentence: str,
    parse_provider: ParseProvider | None = None,
    lexicon: Lexicon | None = None,
) -> list[DescriptionIntention]:
    """One intention per accepted action verb in ``sentence``."""
    lexicon = lexicon or default_lexicon()
    parser = parse_provider or PatternParser(lexicon)
    tokens = parser.parse(sentence)
    roots = [
        t.index
        for t in tokens
        if t.dep in ("ROOT", "conj") and t.pos == "VERB" and lexicon.lemma(t.lemma) is not None
    ]
    verbs = set(roots)
    out = []
    for v in roots:
        members = [t for t in tokens if t.index != v and _clause_of(tokens, t.index, verbs) == v]
        objs = [t for t in members if t.dep == "dobj" and t.head == v]
        action_idx = {v} | {t.index for t in objs}
        target = [t for t in members if t.dep == "compound" and t.head in action_idx]
        negative = any(t.dep == "neg" and t.head == v for t in members)
        used = action_idx | {t.index for t in target}
        params = [t for t in members if t.index not in used and t.pos in NOUN_POS]
        out.append(
            DescriptionIntention(
                action=(lexicon.lemma(tokens[v].lemma) or tokens[v].lemma,) + tuple(t.text for t in objs),
                target_object=tuple(t.text for t in target),
                parameters=tuple(t.text for t in params),
                negative=negative,
                source_sentence=sentence,
            )
        )
    return out


def description_intentions(
    description: str,
    classifier: SentenceClassifier | None = None,
    parse_provider: ParseProvider | None = None,
    symbols: Iterable[str] = (),
) -> list[DescriptionIntention]:
    """Intentions from every code-related sentence of a description."""
    symbols = list(symbols)
    out = []
    for sentence in split_sentences(description):
        if classify_code_related(sentence, classifier, symbols):
            out.extend(extract_intentions(sentence, parse_provider))
    return out
