"""Reasoning interface of the exploration loop.

Builds structured prompts (retrieved context + prior data points + stepwise
reasoning instructions), talks to a chat provider or a deterministic
heuristic stand-in, and bound-checks every returned candidate.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

import httpx

from .design_space import (
    DeviceProfile,
    Directives,
    ParameterPoint,
    WorkloadSpec,
    enumerate_points,
    neighbor_points,
    validate_point,
)
from .errors import (
    BudgetExceeded,
    ProposalUnparseable,
    ProviderUnreachable,
    SpaceExhausted,
    ValidationError,
)
from .retrieval import CorpusDocument, RetrievalIndex, retrieve, trim_to_budget

ACTIONS = ("refine", "rank", "reject")

SECTION_ORDER = ("SYSTEM", "CONTEXT", "DATA_POINTS", "TASK", "REASONING_STEPS")

REASONING_STEPS = (
    "Step 1: Restate the workload, device, and directive constraints.",
    "Step 2: Analyze the prior data points, including rejected and infeasible ones.",
    "Step 3: Identify the current performance bottleneck.",
    "Step 4: Propose candidate parameter points within the directive sets.",
    "Step 5: Emit the structured output block, one candidate per line.",
)

_SYSTEM_TEXT = (
    "You are a hardware design assistant searching for accelerator "
    "configurations. Respond with reasoning followed by a fenced block of "
    "candidate lines in the form: depth=<int> P=<int> width=<int> action=<refine|rank|reject>."
)

_CANDIDATE_RE = re.compile(
    r"^\s*depth=(\d+)\s+P=(\d+)\s+width=(\d+)\s+action=(\w+)(?:\s+rank=(\d+))?\s*$"
)
_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class AdvisorConfig:
    provider: str = "heuristic"  # "remote_chat" | "heuristic"
    endpoint_url: str = ""
    model_name: str = ""
    temperature: float = 0.0
    token_budget: int = 2048
    request_timeout_s: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.token_budget <= 0:
            raise ValidationError("token_budget", "token_budget must be > 0")
        if self.temperature < 0:
            raise ValidationError("temperature", "temperature must be >= 0")


@dataclass(frozen=True)
class Candidate:
    point: ParameterPoint
    action: str
    rank_hint: int | None = None


@dataclass(frozen=True)
class Proposal:
    candidates: tuple[Candidate, ...]
    rationale: str

    def __post_init__(self):
        if not self.candidates:
            raise ValidationError("candidates", "candidate list must be non-empty")
        hints = [c.rank_hint for c in self.candidates if c.rank_hint is not None]
        if len(hints) != len(set(hints)):
            raise ValidationError("rank_hint", "rank_hint values must be distinct")


@dataclass(frozen=True)
class RejectedCandidate:
    point: ParameterPoint
    action: str
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class ParseOutcome:
    accepted: tuple[Candidate, ...]
    rejected: tuple[RejectedCandidate, ...]
    rationale: str

    def proposal(self) -> Proposal | None:
        if not self.accepted:
            return None
        return Proposal(candidates=self.accepted, rationale=self.rationale)


@dataclass
class AdvisorState:
    """Exploration snapshot the advisor reasons over."""

    workload: WorkloadSpec
    device: DeviceProfile
    directives: Directives
    data_points: list = field(default_factory=list)  # recent HardwareDataPoint records
    evaluated_points: set = field(default_factory=set)  # ParameterPoint already evaluated
    best_point: ParameterPoint | None = None


@dataclass(frozen=True)
class PromptBundle:
    sections: dict  # section name -> text, in SECTION_ORDER
    token_estimate: int

    def text(self) -> str:
        parts = []
        for name in SECTION_ORDER:
            parts.append(f"## {name}\n{self.sections[name]}")
        return "\n\n".join(parts) + "\n"


@dataclass(frozen=True)
class AdvisorExchange:
    outcome: ParseOutcome
    prompt_text: str
    reply_text: str


def _render_data_point(p) -> str:
    m = p.metrics
    return (
        f"- point depth={p.configuration.buffer_depth} P={p.configuration.parallelism_p} "
        f"width={p.configuration.data_width} cycles={m.get('total_cycles')} "
        f"feasible={m.get('feasible')} verdict={p.verdict}"
    )


def _token_count(text: str) -> int:
    return len(text.split())


def build_prompt(
    state: AdvisorState, retrieved: list[CorpusDocument], cfg: AdvisorConfig
) -> PromptBundle:
    """Deterministic five-section prompt within the configured token budget.

    When over budget, context documents are dropped from the lowest rank,
    then the oldest data points; an over-budget skeleton raises.
    """
    docs = list(retrieved)
    points = list(state.data_points)
    d = state.directives
    task = (
        f"Workload: kernel={state.workload.kernel_kind} length_l={state.workload.length_l} "
        f"data_width={state.workload.data_width}\n"
        f"Device: {state.device.name} bram_18k={state.device.bram_18k} dsp={state.device.dsp} "
        f"ff={state.device.ff} lut={state.device.lut} clock_target_ns={state.device.clock_target_ns}\n"
        f"Directives: buffer_depth={list(d.buffer_depth)} parallelism_p={list(d.parallelism_p)} "
        f"data_width={list(d.data_width)}\n"
        "Task: propose candidate points that minimize total cycles; "
        "mark each with action refine, rank, or reject."
    )

    while True:
        sections = {
            "SYSTEM": _SYSTEM_TEXT,
            "CONTEXT": "\n\n".join(f"[{doc.doc_id}]\n{doc.text}" for doc in docs) or "(none)",
            "DATA_POINTS": "\n".join(_render_data_point(p) for p in points) or "(none)",
            "TASK": task,
            "REASONING_STEPS": "\n".join(REASONING_STEPS),
        }
        bundle = PromptBundle(sections=sections, token_estimate=0)
        estimate = _token_count(bundle.text())
        if estimate <= cfg.token_budget:
            return PromptBundle(sections=sections, token_estimate=estimate)
        if docs:
            docs.pop()
        elif points:
            points.pop(0)
        else:
            raise BudgetExceeded(
                f"minimal prompt needs {estimate} tokens, budget is {cfg.token_budget}"
            )


def parse_proposal(raw: str, d: Directives, w: WorkloadSpec) -> ParseOutcome:
    """Extract the fenced candidate block and bound-check every candidate.

    Out-of-bounds candidates are returned as rejected with their violation
    reasons; they are never clamped.
    """
    blocks = _FENCE_RE.findall(raw)
    if not blocks:
        raise ProposalUnparseable("no fenced structured block found")
    accepted: list[Candidate] = []
    rejected: list[RejectedCandidate] = []
    matched_any = False
    for block in blocks:
        for line in block.splitlines():
            m = _CANDIDATE_RE.match(line)
            if not m:
                continue
            depth, par, width = int(m.group(1)), int(m.group(2)), int(m.group(3))
            if min(depth, par, width) < 1:
                # degenerate values cannot form a parameter point; not a candidate
                continue
            matched_any = True
            point = ParameterPoint(buffer_depth=depth, parallelism_p=par, data_width=width)
            action = m.group(4)
            rank_hint = int(m.group(5)) if m.group(5) else None
            if action not in ACTIONS:
                rejected.append(RejectedCandidate(point, action, (f"unknown action {action!r}",)))
                continue
            verdict = validate_point(point, w, d)
            if verdict.valid:
                accepted.append(Candidate(point=point, action=action, rank_hint=rank_hint))
            else:
                rejected.append(RejectedCandidate(point, action, verdict.reasons))
    if not matched_any:
        raise ProposalUnparseable("fenced block contains no candidate lines")
    rationale = _FENCE_RE.sub("", raw).strip()
    return ParseOutcome(accepted=tuple(accepted), rejected=tuple(rejected), rationale=rationale)


def _chat_request(prompt_text: str, cfg: AdvisorConfig) -> str:
    body = {
        "model": cfg.model_name,
        "messages": [
            {"role": "system", "content": _SYSTEM_TEXT},
            {"role": "user", "content": prompt_text},
        ],
        "stream": False,
        "options": {"temperature": cfg.temperature, "seed": cfg.seed},
    }
    try:
        response = httpx.post(cfg.endpoint_url, json=body, timeout=cfg.request_timeout_s)
        response.raise_for_status()
        return str(response.json()["message"]["content"])
    except (httpx.HTTPError, KeyError, ValueError) as exc:
        raise ProviderUnreachable(f"chat provider failed: {exc}") from exc


def heuristic_advise(state: AdvisorState, seed: int) -> Proposal:
    """Deterministic offline stand-in: refine around the best point, plus one
    seeded unexplored point for diversity. Never repeats evaluated points."""
    valid_points = [
        p
        for p in enumerate_points(state.directives)
        if validate_point(p, state.workload, state.directives).valid
    ]
    unexplored = [p for p in valid_points if p not in state.evaluated_points]
    if not unexplored:
        raise SpaceExhausted("every valid point in the directive space is evaluated")

    candidates: list[Candidate] = []
    chosen: set[ParameterPoint] = set()
    if state.best_point is not None:
        for neighbor in sorted(neighbor_points(state.best_point, state.directives)):
            if neighbor in state.evaluated_points or neighbor not in set(valid_points):
                continue
            candidates.append(Candidate(point=neighbor, action="refine"))
            chosen.add(neighbor)

    remaining = [p for p in unexplored if p not in chosen]
    if remaining:
        rng = random.Random(seed)
        pick = remaining[rng.randrange(len(remaining))]
        candidates.append(Candidate(point=pick, action="rank"))
        chosen.add(pick)

    if not candidates:
        candidates.append(Candidate(point=unexplored[0], action="rank"))
    rationale = (
        "heuristic: refine neighbors of the best-known point and sample one "
        "unexplored point for diversity"
    )
    return Proposal(candidates=tuple(candidates), rationale=rationale)


def advise(
    state: AdvisorState, cfg: AdvisorConfig, index: RetrievalIndex | None = None
) -> AdvisorExchange:
    """One advisory round: retrieval, prompt, provider call, parse.

    The remote path retries once with an explicit reformat instruction when
    the reply carries no parseable block.
    """
    if cfg.provider == "heuristic":
        proposal = heuristic_advise(state, cfg.seed)
        reply_lines = ["```"]
        reply_lines += [
            f"depth={c.point.buffer_depth} P={c.point.parallelism_p} "
            f"width={c.point.data_width} action={c.action}"
            for c in proposal.candidates
        ]
        reply_lines.append("```")
        outcome = ParseOutcome(
            accepted=proposal.candidates, rejected=(), rationale=proposal.rationale
        )
        return AdvisorExchange(
            outcome=outcome,
            prompt_text=f"(heuristic provider, seed={cfg.seed})",
            reply_text=proposal.rationale + "\n" + "\n".join(reply_lines),
        )

    retrieved: list[CorpusDocument] = []
    if index is not None and index.n_docs:
        query = (
            f"{state.workload.kernel_kind} accelerator buffer compute parallel latency resource"
        )
        # leave room for the prompt skeleton and data points
        retrieved = trim_to_budget(retrieve(index, query, k=5), index, cfg.token_budget // 2)
    prompt = build_prompt(state, retrieved, cfg)
    prompt_text = prompt.text()
    reply = _chat_request(prompt_text, cfg)
    try:
        outcome = parse_proposal(reply, state.directives, state.workload)
    except ProposalUnparseable:
        retry_text = (
            prompt_text
            + "\nYour previous reply had no structured block. Reply again with a fenced "
            "block of lines: depth=<int> P=<int> width=<int> action=<refine|rank|reject>."
        )
        reply = _chat_request(retry_text, cfg)
        outcome = parse_proposal(reply, state.directives, state.workload)
        prompt_text = retry_text
    return AdvisorExchange(outcome=outcome, prompt_text=prompt_text, reply_text=reply)
