"""Greedy decoding with a scratch budget."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pcrsim.errors import ContextOverflow, NonScratchNonAnswerEmission
from pcrsim.nn_core.forward import _token_ids, run_stack
from pcrsim.nn_core.params import DecoderSpec

ANSWERED = "answered"
BUDGET_EXCEEDED = "budget_exceeded"


@dataclass(frozen=True)
class Transcript:
    """Record of one greedy decode: emitted scratch tokens, the answer (or
    the budget verdict) and the rounded logits of every generation step."""

    prompt: tuple[str, ...]
    scratch: tuple[str, ...]
    answer: str | None
    status: str
    step_logits: tuple[tuple[int, ...], ...]

    @property
    def scratch_count(self) -> int:
        return len(self.scratch)

    @property
    def steps(self) -> int:
        return len(self.step_logits)

    def to_json_dict(self) -> dict:
        return {
            "prompt": list(self.prompt),
            "scratch": list(self.scratch),
            "answer": self.answer,
            "status": self.status,
            "steps": self.steps,
            "step_logits": [list(row) for row in self.step_logits],
        }


def argmax_with_ties(spec: DecoderSpec, logit_nums: np.ndarray) -> int:
    """Greedy token choice: maximum logit, ties broken by the spec's fixed
    priority order."""
    best = -1
    best_val = None
    for tid in spec.tie_order:
        v = int(logit_nums[tid])
        if best_val is None or v > best_val:
            best, best_val = tid, v
    return best


def greedy_decode(spec: DecoderSpec, prompt, budget: int) -> Transcript:
    """Decode greedily until the first answer token.

    At most ``budget`` scratch tokens may be emitted first; a decoder that
    wants one more stops with status ``budget_exceeded``.  Emitting any
    token outside scratch + answers raises ``NonScratchNonAnswerEmission``.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    prompt = tuple(prompt)
    context = list(prompt)
    scratch: list[str] = []
    steps: list[tuple[int, ...]] = []
    answer_ids = {spec.token_id(spec.yes_token), spec.token_id(spec.no_token)}
    scratch_ids = {spec.token_id(t) for t in spec.scratch}
    while True:
        if len(context) > spec.max_context:
            raise ContextOverflow(
                f"{len(context)} tokens > context {spec.max_context}"
            )
        res = run_stack(spec, _token_ids(spec, context))
        steps.append(tuple(int(v) for v in res.logit_nums))
        tid = argmax_with_ties(spec, res.logit_nums)
        if tid in answer_ids:
            return Transcript(
                prompt=prompt,
                scratch=tuple(scratch),
                answer=spec.vocab[tid],
                status=ANSWERED,
                step_logits=tuple(steps),
            )
        if tid in scratch_ids:
            if len(scratch) >= budget:
                return Transcript(
                    prompt=prompt,
                    scratch=tuple(scratch),
                    answer=None,
                    status=BUDGET_EXCEEDED,
                    step_logits=tuple(steps),
                )
            tok = spec.vocab[tid]
            scratch.append(tok)
            context.append(tok)
            continue
        raise NonScratchNonAnswerEmission(
            f"decoder emitted {spec.vocab[tid]!r}, outside scratch and answers"
        )
