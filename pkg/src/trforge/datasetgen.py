"""Instruction dataset construction.

Two flavors: "noisy" examples pair a randomly chosen read-the-text
instruction with the OCR text verbatim; "gpt4" examples prompt a chat
model with two OCR variants plus a caption and parse the returned QA
transcript into multi-turn conversations. Conversations serialize to the
JSONL convention used by LLaVA-style trainers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ParseError, ValidationError

IMAGE_TOKEN = "<image>"
HUMAN = "human"
ASSISTANT = "gpt"

_NOISY_SALT = 201
_POOL_SALT = 202


def _data_text(name: str) -> str:
    return resources.files("trforge.data").joinpath(name).read_text(encoding="utf-8")


OCR_INSTRUCTIONS: tuple[str, ...] = tuple(
    line for line in _data_text("ocr_instructions.txt").splitlines() if line.strip()
)


@dataclass(frozen=True)
class Turn:
    role: str
    text: str


@dataclass
class Conversation:
    conversation_id: str
    image_id: str
    turns: list[Turn]
    source: str


@dataclass(frozen=True)
class PromptBundle:
    system: str
    fewshots: tuple[tuple[str, str], ...]
    ocr_a: str
    ocr_b: str
    caption: str


def default_prompt_bundle(ocr_a: str, ocr_b: str, caption: str) -> PromptBundle:
    fewshots = tuple(
        (fs["human"], fs["assistant"])
        for fs in json.loads(_data_text("gpt4_fewshots.json"))
    )
    return PromptBundle(
        system=_data_text("gpt4_system.txt").strip(),
        fewshots=fewshots,
        ocr_a=ocr_a,
        ocr_b=ocr_b,
        caption=caption,
    )


def stable_id_hash(image_id: str) -> int:
    """First 8 bytes of sha256, little-endian; used to derive per-example
    rng streams that do not depend on iteration order."""
    digest = hashlib.sha256(image_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def build_noisy_example(image_id: str, ocr_text: str, seed: int) -> Conversation:
    """Single-turn conversation: a sampled instruction asking for the text
    in the image, answered with the OCR text byte-verbatim."""
    if not ocr_text:
        raise ValidationError(f"empty OCR text for {image_id!r}")
    rng = np.random.default_rng([_NOISY_SALT, seed, stable_id_hash(image_id)])
    instruction = OCR_INSTRUCTIONS[int(rng.integers(len(OCR_INSTRUCTIONS)))]
    return Conversation(
        conversation_id=image_id,
        image_id=image_id,
        turns=[
            Turn(role=HUMAN, text=f"{IMAGE_TOKEN}\n{instruction}"),
            Turn(role=ASSISTANT, text=ocr_text),
        ],
        source="noisy",
    )


def build_noisy_dataset(
    items: Iterable[tuple[str, str]], seed: int
) -> tuple[list[Conversation], int]:
    """Build a conversation per (image_id, ocr_text); images with empty
    OCR text are skipped and counted, not emitted."""
    out: list[Conversation] = []
    skipped = 0
    for image_id, ocr_text in items:
        if not ocr_text:
            skipped += 1
            continue
        out.append(build_noisy_example(image_id, ocr_text, seed))
    return out, skipped


def assemble_gpt4_prompt(bundle: PromptBundle) -> list[dict]:
    """Chat messages: system, few-shot user/assistant pairs, then the real
    query as three lines (OCR variant A, OCR variant B, caption)."""
    if not bundle.system:
        raise ValidationError("empty system message")
    if not bundle.ocr_a and not bundle.ocr_b:
        raise ValidationError("both OCR variants empty; nothing to ask about")
    messages = [{"role": "system", "content": bundle.system}]
    for human, assistant in bundle.fewshots:
        messages.append({"role": "user", "content": human})
        messages.append({"role": "assistant", "content": assistant})
    query = "\n".join([bundle.ocr_a, bundle.ocr_b, bundle.caption])
    messages.append({"role": "user", "content": query})
    return messages


_Q_MARK = "Question:"
_A_MARK = "Answer:"


def parse_qa(response: str) -> list[tuple[str, str]]:
    """Parse a QA transcript into (question, answer) pairs.

    Blocks open at lines starting (after optional indentation) with
    "Question:" or "Answer:"; following lines are absorbed into the open
    block, so multi-paragraph answers survive. Text before the first
    marker is ignored. The block sequence must be strictly alternating
    question, answer, question, answer, ...; anything else raises.
    """
    blocks: list[tuple[str, list[str]]] = []
    for line in response.splitlines():
        stripped = line.lstrip()
        if stripped.startswith(_Q_MARK):
            blocks.append(("q", [stripped[len(_Q_MARK):].strip()]))
        elif stripped.startswith(_A_MARK):
            blocks.append(("a", [stripped[len(_A_MARK):].strip()]))
        elif blocks:
            blocks[-1][1].append(line)

    if not blocks:
        raise ParseError("no 'Question:' line found")

    pairs: list[tuple[str, str]] = []
    pending_q: str | None = None
    for pos, (kind, lines) in enumerate(blocks):
        text = "\n".join(lines).strip()
        if kind == "q":
            if pending_q is not None:
                raise ParseError(f"block {pos}: consecutive questions without an answer")
            pending_q = text
        else:
            if pending_q is None:
                raise ParseError(f"block {pos}: answer without a preceding question")
            pairs.append((pending_q, text))
            pending_q = None
    if pending_q is not None:
        raise ParseError("trailing question without an answer")
    if not pairs:
        raise ParseError("no question/answer pairs found")
    return pairs


def parse_qa_salvage(response: str) -> tuple[list[tuple[str, str]], str | None]:
    """Lenient variant: returns the pairs parsed before the first
    violation, plus the error message (None when fully clean)."""
    try:
        return parse_qa(response), None
    except ParseError as e:
        blocks: list[tuple[str, list[str]]] = []
        for line in response.splitlines():
            stripped = line.lstrip()
            if stripped.startswith(_Q_MARK):
                blocks.append(("q", [stripped[len(_Q_MARK):].strip()]))
            elif stripped.startswith(_A_MARK):
                blocks.append(("a", [stripped[len(_A_MARK):].strip()]))
            elif blocks:
                blocks[-1][1].append(line)
        pairs = []
        pending_q = None
        for kind, lines in blocks:
            text = "\n".join(lines).strip()
            if kind == "q":
                if pending_q is not None:
                    break
                pending_q = text
            else:
                if pending_q is None:
                    break
                pairs.append((pending_q, text))
                pending_q = None
        return pairs, str(e)


def render_qa(pairs: Sequence[tuple[str, str]]) -> str:
    """Inverse of parse_qa for well-formed pairs."""
    chunks = []
    for q, a in pairs:
        chunks.append(f"{_Q_MARK} {q}")
        chunks.append(f"{_A_MARK} {a}")
    return "\n\n".join(chunks)


def qa_to_conversation(
    image_id: str,
    pairs: Sequence[tuple[str, str]],
    *,
    conversation_id: str | None = None,
    source: str = "gpt4",
) -> Conversation:
    """Multi-turn conversation; only the first human turn carries the
    image token."""
    if not pairs:
        raise ValidationError(f"no QA pairs for {image_id!r}")
    turns: list[Turn] = []
    for i, (q, a) in enumerate(pairs):
        prefix = f"{IMAGE_TOKEN}\n" if i == 0 else ""
        turns.append(Turn(role=HUMAN, text=prefix + q))
        turns.append(Turn(role=ASSISTANT, text=a))
    return Conversation(
        conversation_id=conversation_id or image_id,
        image_id=image_id,
        turns=turns,
        source=source,
    )


def select_gpt4_pool(
    assignments: Sequence[tuple],
    *,
    clusters: Sequence[int] = (3, 4, 6, 9),
    per_cluster: int = 4000,
    exclude: frozenset[str] | set[str] = frozenset(),
    seed: int = 0,
) -> list[str]:
    """Sample per_cluster ids from each named cluster, skipping excluded
    ids (e.g. everything already used for noisy examples). Output is
    grouped in the given cluster order; a cluster with too few eligible
    members is an error naming it."""
    members: dict[int, list[str]] = {int(c): [] for c in clusters}
    for row in assignments:
        image_id, cluster = row[0], int(row[1])
        if cluster in members and image_id not in exclude:
            members[cluster].append(image_id)

    out: list[str] = []
    for cluster in clusters:
        pool = members[int(cluster)]
        if len(pool) < per_cluster:
            raise ValidationError(
                f"cluster {cluster} has {len(pool)} eligible ids, needs {per_cluster}"
            )
        rng = np.random.default_rng([_POOL_SALT, seed, int(cluster)])
        picked = sorted(rng.choice(len(pool), size=per_cluster, replace=False))
        out.extend(pool[int(i)] for i in picked)
    return out


def conversation_to_json(conv: Conversation) -> dict:
    return {
        "id": conv.conversation_id,
        "image": conv.image_id,
        "conversations": [{"from": t.role, "value": t.text} for t in conv.turns],
        "source": conv.source,
    }


def conversation_from_json(obj: dict) -> Conversation:
    try:
        turns = [Turn(role=t["from"], text=t["value"]) for t in obj["conversations"]]
        return Conversation(
            conversation_id=obj["id"],
            image_id=obj["image"],
            turns=turns,
            source=obj.get("source", ""),
        )
    except (KeyError, TypeError) as e:
        raise ValidationError(f"bad conversation object: {e}") from e


def validate_conversation(conv: Conversation) -> list[str]:
    """Schema violations as human-readable strings; empty means valid."""
    problems = []
    if not conv.turns:
        problems.append("no turns")
    for i, turn in enumerate(conv.turns):
        expected = HUMAN if i % 2 == 0 else ASSISTANT
        if turn.role != expected:
            problems.append(f"turn {i}: role {turn.role!r}, expected {expected!r}")
    if conv.turns and conv.turns[-1].role != ASSISTANT:
        problems.append("conversation does not end with an assistant turn")
    if conv.turns:
        first = conv.turns[0].text
        if first.count(IMAGE_TOKEN) != 1:
            problems.append(
                f"first human turn has {first.count(IMAGE_TOKEN)} image tokens, expected 1"
            )
    for i, turn in enumerate(conv.turns[1:], start=1):
        if IMAGE_TOKEN in turn.text:
            problems.append(f"turn {i}: stray image token")
    return problems


def write_conversations(convs: Iterable[Conversation], path: str | Path) -> int:
    from .artifacts import write_jsonl

    return write_jsonl(path, (conversation_to_json(c) for c in convs))


def read_conversations(path: str | Path) -> list[Conversation]:
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(conversation_from_json(json.loads(line)))
            except (json.JSONDecodeError, ValidationError) as e:
                raise ValidationError(f"line {lineno}: {e}") from e
    return out


def whitespace_tokenize(text: str) -> list[str]:
    return text.split()


def dataset_stats(
    path: str | Path,
    *,
    tokenize: Callable[[str], Sequence] | None = None,
    tokenizer_name: str | None = None,
) -> dict:
    """Conversation count plus mean instruction/response token lengths.

    Averages run over every human (instruction) and assistant (response)
    turn; the image token is stripped before counting. The default
    whitespace tokenizer is a proxy and is labeled as such; pass a real
    tokenizer to reproduce published numbers."""
    if tokenize is None:
        tokenize = whitespace_tokenize
        tokenizer_name = tokenizer_name or "whitespace-proxy"
    convs = read_conversations(path)
    ins_tokens: list[int] = []
    res_tokens: list[int] = []
    for conv in convs:
        for turn in conv.turns:
            text = turn.text.replace(IMAGE_TOKEN, "").strip()
            n = len(tokenize(text))
            if turn.role == HUMAN:
                ins_tokens.append(n)
            else:
                res_tokens.append(n)
    return {
        "conversations": len(convs),
        "avg_instruction_tokens": float(np.mean(ins_tokens)) if ins_tokens else 0.0,
        "avg_response_tokens": float(np.mean(res_tokens)) if res_tokens else 0.0,
        "tokenizer": tokenizer_name or "custom",
    }
