"""LLM-judged relative scoring and evaluation-question generation.

The judge sees a question, reference context, and two answers (candidate
first, reference second) and must open its reply with the two scores on
one line. The relative score is 100 * candidate / reference, so 100 means
parity with the reference answerer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..datasetgen import parse_qa
from ..errors import ParseError, ValidationError
from ..llmclient import ChatRequest

JUDGE_TEMPERATURE = 0.2
EVAL_GEN_TEMPERATURE = 0.7


@dataclass(frozen=True)
class JudgeOutcome:
    qid: str
    score_candidate: float
    score_reference: float
    relative_pct: float
    rationale: str


def load_judge_prompt(path: str | Path | None = None) -> dict:
    if path is None:
        text = resources.files("trforge.data").joinpath("judge_prompt.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    doc = json.loads(text)
    if "system" not in doc or "user_template" not in doc:
        raise ValidationError("judge prompt file needs 'system' and 'user_template'")
    return doc


def parse_judge_reply(text: str) -> tuple[float, float, str]:
    """First line: two space-separated scores in [1, 10]; the rest is the
    rationale."""
    lines = text.strip().splitlines()
    if not lines:
        raise ParseError("empty judge reply")
    head = lines[0].replace(",", " ").split()
    if len(head) != 2:
        raise ParseError(f"expected two scores on the first line, got {lines[0]!r}")
    try:
        cand, ref = float(head[0]), float(head[1])
    except ValueError as e:
        raise ParseError(f"non-numeric judge scores {lines[0]!r}") from e
    for s in (cand, ref):
        if not 1.0 <= s <= 10.0:
            raise ParseError(f"judge score {s} outside [1, 10]")
    return cand, ref, "\n".join(lines[1:]).strip()


def judge_relative(
    qid: str,
    question: str,
    context: str,
    answer_candidate: str,
    answer_reference: str,
    client,
    *,
    prompt: dict | None = None,
    model: str = "",
    temperature: float = JUDGE_TEMPERATURE,
) -> JudgeOutcome:
    if prompt is None:
        prompt = load_judge_prompt()
    user = prompt["user_template"].format(
        question=question,
        context=context,
        answer_candidate=answer_candidate,
        answer_reference=answer_reference,
    )
    req = ChatRequest(
        messages=[
            {"role": "system", "content": prompt["system"]},
            {"role": "user", "content": user},
        ],
        temperature=temperature,
        model=model,
        request_id=qid,
    )
    result = client.chat(req)
    cand, ref, rationale = parse_judge_reply(result.text)
    return JudgeOutcome(
        qid=qid,
        score_candidate=cand,
        score_reference=ref,
        relative_pct=100.0 * cand / ref,
        rationale=rationale,
    )


def gen_read_eval_questions(
    image_id: str,
    ocr_text: str,
    caption: str,
    client,
    *,
    system: str | None = None,
    model: str = "",
    temperature: float = EVAL_GEN_TEMPERATURE,
) -> list[str]:
    """Ask the LLM to write QA about an image given its OCR text and
    caption (no few-shots), then keep just the questions."""
    if not ocr_text and not caption:
        raise ValidationError(f"{image_id!r}: no OCR text and no caption")
    if system is None:
        system = (
            resources.files("trforge.data").joinpath("gpt4_system.txt").read_text("utf-8").strip()
        )
    blocks = [b for b in (ocr_text, caption) if b]
    req = ChatRequest(
        messages=[
            {"role": "system", "content": system},
            {"role": "user", "content": "\n".join(blocks)},
        ],
        temperature=temperature,
        model=model,
        request_id=image_id,
    )
    result = client.chat(req)
    pairs = parse_qa(result.text)
    return [q for q, _ in pairs]
