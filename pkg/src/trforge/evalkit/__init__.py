"""VQA metrics, LLM judging, and the font-size study."""

from .fontsize import DEFAULT_TARGETS, FontSizeBin, RescaleJob, fontsize_plan, fontsize_score
from .judge import (
    EVAL_GEN_TEMPERATURE,
    JUDGE_TEMPERATURE,
    JudgeOutcome,
    gen_read_eval_questions,
    judge_relative,
    load_judge_prompt,
    parse_judge_reply,
)
from .metrics import (
    anls,
    anls_best,
    cider_d,
    contains_accuracy,
    levenshtein,
    meteor_lite,
    meteor_lite_best,
    normalize_text,
    partial_correct,
    partial_correct_best,
    rouge_l,
)
from .records import (
    ADAPTERS,
    EvalRecord,
    compute_report,
    from_docvqa,
    from_ocrvqa,
    from_stvqa,
    from_textvqa,
    merge_predictions,
    read_records,
    record_from_json,
    record_to_json,
    write_records,
)

__all__ = [
    "ADAPTERS",
    "DEFAULT_TARGETS",
    "EVAL_GEN_TEMPERATURE",
    "EvalRecord",
    "FontSizeBin",
    "JUDGE_TEMPERATURE",
    "JudgeOutcome",
    "RescaleJob",
    "anls",
    "anls_best",
    "cider_d",
    "compute_report",
    "contains_accuracy",
    "fontsize_plan",
    "fontsize_score",
    "from_docvqa",
    "from_ocrvqa",
    "from_stvqa",
    "from_textvqa",
    "gen_read_eval_questions",
    "judge_relative",
    "levenshtein",
    "load_judge_prompt",
    "merge_predictions",
    "meteor_lite",
    "meteor_lite_best",
    "normalize_text",
    "parse_judge_reply",
    "partial_correct",
    "partial_correct_best",
    "read_records",
    "record_from_json",
    "record_to_json",
    "rouge_l",
    "write_records",
]
