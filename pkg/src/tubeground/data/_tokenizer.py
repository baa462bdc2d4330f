import re
from typing import Dict, Iterable, List, Tuple

from tubeground.data.exceptions import TokenizationError

PAD_TOKEN: str = "<pad>"
"""Padding token."""
UNK_TOKEN: str = "<unk>"
"""Unknown-word token."""
PAD_ID: int = 0
"""Reserved id of :data:`PAD_TOKEN`."""
UNK_ID: int = 1
"""Reserved id of :data:`UNK_TOKEN`."""

_WORD = re.compile(r"[^\W_]+")


def split_words(sentence: str) -> Tuple[str, ...]:
    """Lowercase and split a sentence on whitespace and punctuation.

    Args:
        sentence: Input text.

    Returns:
        A tuple of words.

    Raises:
        TokenizationError: If `sentence` contains no words.

    Examples:
        >>> from tubeground.data import split_words
        >>> split_words("A cat runs.")
        ('a', 'cat', 'runs')
    """
    words = tuple(_WORD.findall(sentence.lower()))
    if not words:
        raise TokenizationError(f"No tokens in {sentence=}.")
    return words


def tokenize(sentence: str, vocabulary: Dict[str, int]) -> List[int]:
    """Convert a sentence to token ids.

    Args:
        sentence: Input text.
        vocabulary: A ``{token: id}`` dict. Unknown words map to :data:`UNK_ID`.

    Returns:
        Token ids, one per word returned by :func:`split_words`.

    Examples:
        >>> from tubeground.data import build_vocabulary, tokenize
        >>> vocabulary = build_vocabulary(["a cat"])
        >>> tokenize("A cat runs.", vocabulary)
        [2, 3, 1]
    """
    return encode(split_words(sentence), vocabulary)


def encode(words: Iterable[str], vocabulary: Dict[str, int]) -> List[int]:
    """Map words to ids, using :data:`UNK_ID` for unknown words."""
    return [vocabulary.get(w, UNK_ID) for w in words]


def build_vocabulary(sentences: Iterable[str]) -> Dict[str, int]:
    """Create a vocabulary covering all words in `sentences`.

    Reserved tokens come first; remaining words are sorted so that the result does not depend on sentence order.

    Args:
        sentences: Sentences or single words.

    Returns:
        A ``{token: id}`` dict.
    """
    words = sorted({w for s in sentences for w in split_words(s)})
    vocabulary = {PAD_TOKEN: PAD_ID, UNK_TOKEN: UNK_ID}
    for w in words:
        vocabulary[w] = len(vocabulary)
    return vocabulary
