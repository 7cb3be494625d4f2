"""Chain certificates: a re-checkable file format for lower-bound chains.

A certificate lists every problem in problem-file syntax plus, per step, the
side stepped, the target set-configurations (over the previous problem's
labels), the set renaming, and any configurations added afterwards.  The
verifier replays each step from scratch and compares canonical renderings
byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ChainVerificationError, ProblemFormatError
from .family import Chain
from .problems import (
    BLACK,
    WHITE,
    Problem,
    other_side,
    parse_problem,
    render_problem,
)
from .relax import add_configurations, relax_to_targets, set_config
from .speedup import re_black, re_white
from .zeroround import zero_round

from .problems import _parse_config_line, render_config  # noqa: E402

HEADER = "# chain certificate v1"


def _render_set(s: frozenset[str]) -> str:
    return "{" + ",".join(sorted(s)) + "}"


def _render_set_config(t) -> str:
    parts = []
    for s, mult in t:
        text = _render_set(s)
        parts.append(text if mult == 1 else f"{text}^{mult}")
    return " ".join(parts)


def _parse_set_token(token: str, line_no: int):
    mult = 1
    if "^" in token:
        token, exp = token.rsplit("^", 1)
        try:
            mult = int(exp)
        except ValueError:
            raise ProblemFormatError(f"bad exponent in {token!r}", line_no) from None
    if not (token.startswith("{") and token.endswith("}")):
        raise ProblemFormatError(f"bad set token {token!r}", line_no)
    members = [m for m in token[1:-1].split(",") if m]
    if not members:
        raise ProblemFormatError("empty set token", line_no)
    return frozenset(members), mult


def _parse_set_config(line: str, line_no: int):
    return set_config(*(_parse_set_token(tok, line_no) for tok in line.split()))


def render_chain(chain: Chain) -> str:
    if chain.claimed_bound is None:
        raise ProblemFormatError("only finite verified chains can be serialized")
    lines = [
        HEADER,
        f"claimed-bound: {chain.claimed_bound}",
        f"start-side: {chain.start_side}",
        f"problems: {len(chain.problems)}",
    ]
    for i, problem in enumerate(chain.problems):
        lines.append("")
        lines.append(f"[problem {i}]")
        lines.append(render_problem(problem).rstrip("\n"))
        if i < len(chain.steps):
            step = chain.steps[i]
            lines.append("")
            lines.append(f"[step {i}]")
            lines.append(f"re: {step.side}")
            lines.append("targets:")
            lines.extend(_render_set_config(t) for t in step.targets)
            lines.append("renaming:")
            for s, name in sorted(step.renaming.items(), key=lambda kv: kv[1]):
                lines.append(f"{name} = {' '.join(sorted(s))}")
            if step.added:
                lines.append("add:")
                lines.extend(render_config(c) for c in step.added)
    return "\n".join(lines) + "\n"


@dataclass
class ParsedStep:
    side: str
    targets: list
    renaming: dict
    added_lines: list[str] = field(default_factory=list)


@dataclass
class ParsedCertificate:
    claimed_bound: int
    start_side: str
    problems: list[Problem]
    steps: list[ParsedStep]


def parse_certificate(text: str) -> ParsedCertificate:
    bound = None
    start_side = None
    count = None
    problem_blocks: dict[int, list[str]] = {}
    steps: dict[int, ParsedStep] = {}
    section = None  # ("problem", i) | ("step", i)
    mode = None  # targets | renaming | add
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[problem "):
            section = ("problem", int(line[9:-1]))
            problem_blocks[section[1]] = []
            mode = None
            continue
        if line.startswith("[step "):
            section = ("step", int(line[6:-1]))
            steps[section[1]] = ParsedStep(side="", targets=[], renaming={})
            mode = None
            continue
        if section is None:
            key, _, value = line.partition(":")
            value = value.strip()
            if key == "claimed-bound":
                bound = int(value)
            elif key == "start-side":
                start_side = value
            elif key == "problems":
                count = int(value)
            else:
                raise ProblemFormatError(f"unknown header {key!r}", line_no)
            continue
        if section[0] == "problem":
            problem_blocks[section[1]].append(raw)
            continue
        step = steps[section[1]]
        if line.startswith("re:"):
            step.side = line.split(":", 1)[1].strip()
            if step.side not in (WHITE, BLACK):
                raise ProblemFormatError(f"bad step side {step.side!r}", line_no)
        elif line == "targets:":
            mode = "targets"
        elif line == "renaming:":
            mode = "renaming"
        elif line == "add:":
            mode = "add"
        elif mode == "targets":
            step.targets.append(_parse_set_config(line, line_no))
        elif mode == "renaming":
            name, _, members = line.partition("=")
            step.renaming[frozenset(members.split())] = name.strip()
        elif mode == "add":
            step.added_lines.append(line)
        else:
            raise ProblemFormatError(f"unexpected line {line!r}", line_no)
    if bound is None or start_side is None or count is None:
        raise ProblemFormatError("certificate misses a required header")
    problems = []
    for i in range(count):
        if i not in problem_blocks:
            raise ProblemFormatError(f"certificate misses [problem {i}]")
        problems.append(parse_problem("\n".join(problem_blocks[i])))
    step_list = []
    for i in range(count - 1):
        if i not in steps:
            raise ProblemFormatError(f"certificate misses [step {i}]")
        step_list.append(steps[i])
    return ParsedCertificate(bound, start_side, problems, step_list)


@dataclass
class CertificateReport:
    ok: bool
    bound: int | None
    messages: list[str] = field(default_factory=list)


def verify_certificate(text: str) -> CertificateReport:
    """Replay every step of a certificate and re-check the tail; independent of
    how the certificate was produced."""
    try:
        cert = parse_certificate(text)
    except (ProblemFormatError, ValueError) as exc:
        return CertificateReport(False, None, [f"parse error: {exc}"])
    messages = []
    if cert.claimed_bound == 0:
        if cert.problems:
            messages.append("bound 0 must not list problems")
        return CertificateReport(not messages, 0, messages)
    if cert.claimed_bound != len(cert.problems):
        messages.append(
            f"claimed bound {cert.claimed_bound} != problem count {len(cert.problems)}"
        )
        return CertificateReport(False, cert.claimed_bound, messages)
    for i, step in enumerate(cert.steps):
        algo = (
            cert.start_side if i % 2 == 0 else other_side(cert.start_side)
        )
        if step.side != other_side(algo):
            messages.append(f"step {i}: side {step.side} does not alternate")
            return CertificateReport(False, cert.claimed_bound, messages)
        try:
            r = (
                re_black(cert.problems[i])
                if step.side == BLACK
                else re_white(cert.problems[i])
            )
            produced = relax_to_targets(r, step.targets, step.renaming)
            if step.added_lines:
                added = [
                    _parse_config_line(line, 0) for line in step.added_lines
                ]
                produced = add_configurations(
                    produced, other_side(step.side), added
                )
        except Exception as exc:  # any engine failure voids the certificate
            messages.append(f"step {i}: replay failed: {exc}")
            return CertificateReport(False, cert.claimed_bound, messages)
        if render_problem(produced) != render_problem(cert.problems[i + 1]):
            messages.append(f"step {i}: replay does not match [problem {i + 1}]")
            return CertificateReport(False, cert.claimed_bound, messages)
    tail_index = len(cert.problems) - 1
    tail_algo = (
        cert.start_side if tail_index % 2 == 0 else other_side(cert.start_side)
    )
    if zero_round(cert.problems[-1], tail_algo).solvable:
        messages.append("tail problem is zero-round solvable")
        return CertificateReport(False, cert.claimed_bound, messages)
    return CertificateReport(True, cert.claimed_bound, messages)


def chain_certificate(chain: Chain) -> str:
    """Render and self-check a chain certificate."""
    text = render_chain(chain)
    report = verify_certificate(text)
    if not report.ok:
        raise ChainVerificationError(
            "grown certificate failed its own replay: " + "; ".join(report.messages)
        )
    return text
