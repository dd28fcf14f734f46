"""Continuation-prediction challenge and the n-gram baseline model.

A question pairs an 8-bar prompt with four 8-bar candidate continuations,
exactly one of which truly follows the prompt in its source piece; the
wrong answers are windows drawn from three other pieces.  A model answers
by the mean probability it assigns to each candidate's tokens under
teacher forcing, truncated to the shortest candidate, and picks the
argmax (lowest index on ties).

Any sequence model can participate: the built-in interpolated add-alpha
n-gram, the uniform and corpus-memorizing reference models, or an
external process speaking the line protocol (history ids out, probability
vector back, one line per step).
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Sequence

import numpy as np

DISTRIBUTION_TOLERANCE = 1e-9


class ChallengeError(ValueError):
    """Invalid challenge setup (corpus too small, malformed candidates...)."""


class ModelProtocolError(RuntimeError):
    """An external model broke the line protocol contract."""


class SequenceModel:
    """Interface: a conditional distribution over the next token id."""

    vocab_size: int

    def next_token_distribution(self, history: Sequence[int]) -> np.ndarray:
        raise NotImplementedError


def checked_distribution(model: SequenceModel, history: Sequence[int]) -> np.ndarray:
    """Query a model and enforce the probability contract at the boundary."""
    p = np.asarray(model.next_token_distribution(history), dtype=float)
    if p.shape != (model.vocab_size,):
        raise ChallengeError(
            f"model returned shape {p.shape}, expected ({model.vocab_size},)"
        )
    if np.any(p < 0):
        raise ChallengeError("model returned negative probabilities")
    if abs(float(p.sum()) - 1.0) > DISTRIBUTION_TOLERANCE:
        raise ChallengeError(f"model distribution sums to {p.sum()!r}, not 1")
    return p


class UniformModel(SequenceModel):
    def __init__(self, vocab_size: int):
        self.vocab_size = vocab_size

    def next_token_distribution(self, history: Sequence[int]) -> np.ndarray:
        return np.full(self.vocab_size, 1.0 / self.vocab_size)


class CorpusOracleModel(SequenceModel):
    """Memorizes a corpus and predicts its continuation with certainty.

    When the history is a prefix of some memorized piece the next token
    of that piece gets probability ``1 - epsilon``; otherwise the model
    falls back to uniform.  Useful as a calibration ceiling.
    """

    def __init__(self, pieces: Sequence[Sequence[int]], vocab_size: int, epsilon: float = 1e-6):
        self.vocab_size = vocab_size
        self.epsilon = epsilon
        self._next: dict[tuple[int, ...], set[int]] = {}
        for piece in pieces:
            piece = tuple(piece)
            for j in range(len(piece)):
                self._next.setdefault(piece[:j], set()).add(piece[j])

    def next_token_distribution(self, history: Sequence[int]) -> np.ndarray:
        predicted = self._next.get(tuple(history))
        if not predicted:
            return np.full(self.vocab_size, 1.0 / self.vocab_size)
        p = np.full(self.vocab_size, self.epsilon / self.vocab_size)
        p[sorted(predicted)] += (1.0 - self.epsilon) / len(predicted)
        return p


class NGramModel(SequenceModel):
    """Interpolated n-gram model with add-alpha smoothing.

    ``weights[k-1]`` scales the order-k component; each component is
    ``(count(context, x) + alpha) / (count(context) + alpha * V)`` over
    the last ``k - 1`` history tokens.  Every token keeps nonzero
    probability, so the model never assigns zero to a continuation.
    """

    def __init__(
        self,
        order: int,
        vocab_size: int,
        alpha: float = 0.01,
        weights: Sequence[float] | None = None,
    ):
        if order < 1:
            raise ChallengeError(f"n-gram order must be >= 1, got {order}")
        if alpha <= 0:
            raise ChallengeError("smoothing alpha must be positive")
        self.order = order
        self.vocab_size = vocab_size
        self.alpha = alpha
        if weights is None:
            weights = [1.0 / order] * order
        if len(weights) != order or any(w < 0 for w in weights) or sum(weights) <= 0:
            raise ChallengeError("need one non-negative weight per order")
        total = float(sum(weights))
        self.weights = tuple(w / total for w in weights)
        # counts[k-1]: context tuple of length k-1 -> {token: count}
        self.counts: list[dict[tuple[int, ...], dict[int, int]]] = [
            {} for _ in range(order)
        ]

    def observe(self, sequence: Sequence[int]) -> None:
        seq = list(sequence)
        for k in range(1, self.order + 1):
            table = self.counts[k - 1]
            for j in range(k - 1, len(seq)):
                ctx = tuple(seq[j - k + 1 : j])
                nxt = table.setdefault(ctx, {})
                nxt[seq[j]] = nxt.get(seq[j], 0) + 1

    def next_token_distribution(self, history: Sequence[int]) -> np.ndarray:
        history = tuple(history)
        p = np.zeros(self.vocab_size)
        denom_base = self.alpha * self.vocab_size
        for k in range(1, self.order + 1):
            if self.weights[k - 1] == 0:
                continue
            if k == 1:
                ctx: tuple[int, ...] = ()
            elif len(history) >= k - 1:
                ctx = history[-(k - 1) :]
            else:
                ctx = history  # short history: lookup misses, leaving the smoothed floor
            table = self.counts[k - 1].get(ctx, {})
            total = sum(table.values())
            component = np.full(self.vocab_size, self.alpha)
            for token, count in table.items():
                component[token] += count
            p += self.weights[k - 1] * component / (total + denom_base)
        return p / p.sum()

    def sequence_log_likelihood(self, sequence: Sequence[int]) -> float:
        seq = list(sequence)
        total = 0.0
        for j in range(len(seq)):
            p = self.next_token_distribution(seq[:j])
            total += float(np.log(p[seq[j]]))
        return total

    def perplexity(self, sequences: Sequence[Sequence[int]]) -> float:
        log_sum = 0.0
        count = 0
        for seq in sequences:
            log_sum += self.sequence_log_likelihood(seq)
            count += len(seq)
        if count == 0:
            raise ChallengeError("no tokens to evaluate")
        return float(np.exp(-log_sum / count))

    # --- persistence ---

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "vocab_size": self.vocab_size,
            "alpha": self.alpha,
            "weights": list(self.weights),
            "counts": [
                {
                    ",".join(map(str, ctx)): {str(t): c for t, c in sorted(nxt.items())}
                    for ctx, nxt in sorted(table.items())
                }
                for table in self.counts
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NGramModel":
        model = cls(
            order=data["order"],
            vocab_size=data["vocab_size"],
            alpha=data["alpha"],
            weights=data["weights"],
        )
        for k_minus_1, table in enumerate(data["counts"]):
            for ctx_text, nxt in table.items():
                ctx = tuple(int(x) for x in ctx_text.split(",")) if ctx_text else ()
                model.counts[k_minus_1][ctx] = {int(t): c for t, c in nxt.items()}
        return model

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NGramModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train_ngram(
    sequences: Sequence[Sequence[int]],
    order: int,
    vocab_size: int,
    alpha: float = 0.01,
    weights: Sequence[float] | None = None,
) -> NGramModel:
    """Count n-grams of every order up to ``order`` over a corpus."""
    if not sequences:
        raise ChallengeError("cannot train on an empty corpus")
    model = NGramModel(order=order, vocab_size=vocab_size, alpha=alpha, weights=weights)
    for seq in sequences:
        model.observe(seq)
    return model


# --- external model line protocol -------------------------------------------


class LineProtocolModel(SequenceModel):
    """Adapter speaking the external-model line protocol over text streams.

    Per step the harness writes one line of space-separated history token
    ids (an empty line for an empty history) and reads one line back:
    either ``vocab_size`` space-separated probabilities, or a sparse form
    ``* idx:prob idx:prob ...`` where unlisted tokens share the leftover
    mass uniformly.
    """

    def __init__(self, reader: IO[str], writer: IO[str], vocab_size: int):
        self.reader = reader
        self.writer = writer
        self.vocab_size = vocab_size

    def next_token_distribution(self, history: Sequence[int]) -> np.ndarray:
        self.writer.write(" ".join(map(str, history)) + "\n")
        self.writer.flush()
        line = self.reader.readline()
        if not line:
            raise ModelProtocolError("external model closed the stream")
        fields = line.split()
        if fields and fields[0] == "*":
            p = np.zeros(self.vocab_size)
            listed = 0.0
            seen = 0
            for item in fields[1:]:
                idx_text, _, prob_text = item.partition(":")
                try:
                    idx, prob = int(idx_text), float(prob_text)
                except ValueError:
                    raise ModelProtocolError(f"bad sparse entry {item!r}") from None
                if not 0 <= idx < self.vocab_size:
                    raise ModelProtocolError(f"sparse index {idx} out of range")
                p[idx] = prob
                listed += prob
                seen += 1
            rest = self.vocab_size - seen
            if rest > 0:
                p[p == 0] += max(1.0 - listed, 0.0) / rest
            return p
        try:
            p = np.array([float(x) for x in fields])
        except ValueError:
            raise ModelProtocolError(f"unparseable probability line {line!r}") from None
        if p.size != self.vocab_size:
            raise ModelProtocolError(
                f"expected {self.vocab_size} probabilities, got {p.size}"
            )
        return p


class SubprocessModel(LineProtocolModel):
    """Line-protocol model backed by a child process."""

    def __init__(self, command: Sequence[str], vocab_size: int):
        self._proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        super().__init__(self._proc.stdout, self._proc.stdin, vocab_size)

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.wait(timeout=10)

    def __enter__(self) -> "SubprocessModel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


# --- questions ---------------------------------------------------------------


@dataclass(frozen=True)
class ChallengeQuestion:
    prompt: tuple[int, ...]
    candidates: tuple[tuple[int, ...], ...]
    true_index: int
    source_piece: int = -1

    def __post_init__(self) -> None:
        if len(self.candidates) != 4:
            raise ChallengeError("a question needs exactly 4 candidates")
        if len(set(self.candidates)) != 4:
            raise ChallengeError("candidates must be pairwise distinct")
        if not 0 <= self.true_index <= 3:
            raise ChallengeError("true_index must be in 0..3")

    @property
    def truncation_length(self) -> int:
        return min(len(c) for c in self.candidates)


def _bar_segments(piece: Sequence[int], bar_token_id: int) -> list[int]:
    """Indices where each bar starts (positions of Bar tokens)."""
    return [i for i, t in enumerate(piece) if t == bar_token_id]


def _bar_window(piece: Sequence[int], bar_starts: list[int], first_bar: int, bars: int):
    start = bar_starts[first_bar]
    end = bar_starts[first_bar + bars] if first_bar + bars < len(bar_starts) else len(piece)
    return tuple(piece[start:end])


def build_questions(
    pieces: Sequence[Sequence[int]],
    count: int,
    seed: int,
    bar_token_id: int,
    prompt_bars: int = 8,
    continuation_bars: int = 8,
) -> list[ChallengeQuestion]:
    """Draw ``count`` questions deterministically from a token corpus.

    The prompt is the opening ``prompt_bars`` of a piece and the true
    candidate the bars that follow it; the three distractors are
    bar-aligned windows from three distinct other pieces.
    """
    needed = prompt_bars + continuation_bars
    starts = [_bar_segments(p, bar_token_id) for p in pieces]
    eligible = [i for i, s in enumerate(starts) if len(s) >= needed]
    if len(eligible) < 4:
        raise ChallengeError(
            f"need at least 4 pieces with >= {needed} bars, have {len(eligible)}"
        )
    rng = np.random.default_rng(seed)
    questions = []
    for _ in range(count):
        src = int(rng.choice(eligible))
        prompt = _bar_window(pieces[src], starts[src], 0, prompt_bars)
        true_cont = _bar_window(pieces[src], starts[src], prompt_bars, continuation_bars)
        others = [i for i in eligible if i != src]
        candidates = None
        for _attempt in range(64):
            chosen = rng.choice(len(others), size=3, replace=False)
            distractors = []
            for oi in chosen:
                piece_idx = others[int(oi)]
                max_start = len(starts[piece_idx]) - continuation_bars
                first = int(rng.integers(0, max_start + 1))
                distractors.append(
                    _bar_window(pieces[piece_idx], starts[piece_idx], first, continuation_bars)
                )
            pool = [true_cont, *distractors]
            if len(set(pool)) == 4:
                candidates = distractors
                break
        if candidates is None:
            raise ChallengeError("could not draw 4 distinct candidates; corpus too repetitive")
        true_index = int(rng.integers(0, 4))
        ordered = list(candidates)
        ordered.insert(true_index, true_cont)
        questions.append(
            ChallengeQuestion(
                prompt=prompt,
                candidates=tuple(ordered),
                true_index=true_index,
                source_piece=src,
            )
        )
    return questions


# --- scoring -------------------------------------------------------------------


def score_continuation(
    model: SequenceModel,
    prompt: Sequence[int],
    candidate: Sequence[int],
    length: int | None = None,
    sampled_prefix: bool = False,
    rng: np.random.Generator | None = None,
) -> float:
    """Mean per-token probability of a candidate continuation.

    The candidate is truncated to ``length`` tokens (its own length by
    default).  Under teacher forcing the history grows with the
    candidate's own tokens; with ``sampled_prefix=True`` it grows with
    tokens sampled from the model instead.
    """
    candidate = list(candidate)
    if length is None:
        length = len(candidate)
    if length < 1 or not candidate:
        raise ChallengeError("empty candidate continuation")
    candidate = candidate[:length]
    if sampled_prefix and rng is None:
        rng = np.random.default_rng(0)
    history = list(prompt)
    total = 0.0
    for token in candidate:
        p = checked_distribution(model, history)
        total += float(p[token])
        if sampled_prefix:
            history.append(int(rng.choice(model.vocab_size, p=p)))
        else:
            history.append(token)
    return total / len(candidate)


def answer_question(
    model: SequenceModel, question: ChallengeQuestion, sampled_prefix: bool = False
) -> tuple[int, bool, list[float]]:
    """Score all four candidates and answer by argmax (lowest index wins ties)."""
    level = question.truncation_length
    scores = [
        score_continuation(model, question.prompt, c, length=level, sampled_prefix=sampled_prefix)
        for c in question.candidates
    ]
    chosen = int(np.argmax(scores))
    return chosen, chosen == question.true_index, scores


@dataclass
class ChallengeResult:
    accuracy: float
    rows: list[dict] = field(default_factory=list)


def run_challenge(
    model: SequenceModel,
    questions: Sequence[ChallengeQuestion],
    sampled_prefix: bool = False,
) -> ChallengeResult:
    """Answer every question; the log keeps all four probabilities per row."""
    if not questions:
        raise ChallengeError("no questions to run")
    rows = []
    correct_count = 0
    for qid, question in enumerate(questions):
        chosen, correct, scores = answer_question(model, question, sampled_prefix)
        correct_count += int(correct)
        rows.append(
            {
                "question": qid,
                "scores": scores,
                "chosen": chosen,
                "true": question.true_index,
                "correct": correct,
            }
        )
    return ChallengeResult(accuracy=correct_count / len(questions), rows=rows)


# --- generation ------------------------------------------------------------------


class GenerationError(RuntimeError):
    """Sampling hit the hard length cap before producing a full bar."""


def generate_tokens(
    model: SequenceModel,
    primer: Sequence[int],
    target_bars: int,
    bar_token_id: int,
    temperature: float = 1.0,
    seed: int = 0,
    max_tokens: int = 20000,
) -> list[int]:
    """Sample token ids until ``target_bars`` bars are complete.

    Bars are counted by Bar tokens (the primer's included); sampling runs
    until the bar after the last requested one begins, so the final bar is
    complete, or until ``max_tokens``.  Deterministic given the seed.
    """
    if temperature <= 0:
        raise ChallengeError("temperature must be positive")
    rng = np.random.default_rng(seed)
    out = list(primer)
    bars = sum(1 for t in out if t == bar_token_id)
    while len(out) < max_tokens:
        p = checked_distribution(model, out)
        if temperature != 1.0:
            with np.errstate(divide="ignore"):
                logits = np.log(p) / temperature
            logits -= logits.max()
            p = np.exp(logits)
            p /= p.sum()
        token = int(rng.choice(model.vocab_size, p=p))
        if token == bar_token_id and bars >= target_bars:
            break
        out.append(token)
        if token == bar_token_id:
            bars += 1
    if bars == 0:
        raise GenerationError(
            f"no Bar token within the {max_tokens}-token cap; cannot form a piece"
        )
    return out
