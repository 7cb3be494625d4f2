"""Structured text records: `key: value` header lines, a blank line, a body.

The service speaks this format over HTTP in both directions; the explorer UI
parses the same shape, so field names here are a compatibility surface.
"""

from __future__ import annotations


def render_record(fields: dict[str, str], body: str = "") -> str:
    lines = [f"{k}: {v}" for k, v in fields.items()]
    text = "\n".join(lines) + "\n"
    if body:
        text += "\n" + body
        if not text.endswith("\n"):
            text += "\n"
    return text


def parse_record(text: str) -> tuple[dict[str, str], str]:
    head, sep, body = text.partition("\n\n")
    fields: dict[str, str] = {}
    for line in head.splitlines():
        if not line.strip():
            continue
        key, colon, value = line.partition(":")
        if not colon:
            raise ValueError(f"bad header line {line!r}")
        fields[key.strip()] = value.strip()
    return fields, body if sep else ""
