/** Pure render functions; every panel shows service-confirmed state only.
 *
 * The problem panel embeds the service's canonical text verbatim (character
 * for character), never a local re-rendering.
 */

import { SessionState, JobState } from "./api.js";
import { Arrow, layoutDiagram, renderDiagramSvg, reachable } from "./diagram.js";
import { HistoryTree } from "./history.js";

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;");
}

export function problemPanel(state: SessionState): string {
  const provenance = Object.entries(state.provenance)
    .map(([label, members]) => `<li><code>${escapeHtml(label)}</code> = {${escapeHtml(members)}}</li>`)
    .join("");
  return (
    `<section class="problem" data-hash="${state.hash}" data-revision="${state.revision}">` +
    `<pre class="problem-text">${escapeHtml(state.problemText)}</pre>` +
    (provenance ? `<ul class="provenance">${provenance}</ul>` : "") +
    `</section>`
  );
}

export function labelsOf(problemText: string): string[] {
  const labels = new Set<string>();
  let inBody = false;
  for (const line of problemText.split("\n")) {
    if (line === "white:" || line === "black:") {
      inBody = true;
      continue;
    }
    if (!inBody || !line.trim() || line.startsWith("delta:")) continue;
    // bracket groups may contain spaces, so scan rather than split
    for (const match of line.matchAll(/\[[^\]]*\]|[^\s\[\]^]+/g)) {
      const token = match[0];
      if (/^\^?\d+$/.test(token)) continue; // exponent remainder
      if (token.startsWith("[")) {
        const inner = token.slice(1, -1).trim();
        const parts = /\s/.test(inner) ? inner.split(/\s+/) : inner.split("");
        parts.forEach((part) => part && labels.add(part));
      } else {
        labels.add(token.replace(/\^\d+$/, ""));
      }
    }
  }
  return [...labels].sort();
}

export function diagramPanel(labels: string[], arrows: Arrow[], side: string): string {
  const layout = layoutDiagram(labels, arrows);
  return (
    `<section class="diagram" data-side="${side}">` +
    renderDiagramSvg(layout) +
    `</section>`
  );
}

export interface MergeSelection {
  sources: string[];
  target: string | null;
  side: "white" | "black";
}

/** Submit is enabled only when every source can reach the target in the
 * opposite side's diagram, which is the strength evidence the service will
 * re-check on submit. */
export function mergeJustified(selection: MergeSelection, oppositeArrows: Arrow[]): boolean {
  if (!selection.target || selection.sources.length === 0) return false;
  return selection.sources.every(
    (source) => source !== selection.target && reachable(oppositeArrows, source, selection.target!),
  );
}

export function mergePanel(selection: MergeSelection, oppositeArrows: Arrow[]): string {
  const justified = mergeJustified(selection, oppositeArrows);
  const evidence = selection.sources
    .map((source) => {
      const ok = selection.target ? reachable(oppositeArrows, source, selection.target) : false;
      return `<li>${escapeHtml(source)} → ${escapeHtml(selection.target ?? "?")}: ${
        ok ? "justified" : "no strength evidence"
      }</li>`;
    })
    .join("");
  return (
    `<section class="merge" data-side="${selection.side}">` +
    `<ul class="evidence">${evidence}</ul>` +
    `<button class="submit-merge"${justified ? "" : " disabled"}>merge</button>` +
    `</section>`
  );
}

export function mergeBody(selection: MergeSelection): string {
  return selection.sources.map((source) => `${source} -> ${selection.target}`).join("\n") + "\n";
}

export function historyPanel(tree: HistoryTree): string {
  const rows = tree
    .timeline()
    .map(({ node, depth, current }) => {
      const classes = ["entry"];
      if (current) classes.push("current");
      if (!node.live) classes.push("dead-branch");
      return (
        `<li class="${classes.join(" ")}" style="--depth: ${depth}" data-node="${node.id}">` +
        `${escapeHtml(node.action)} <code>${node.hash.slice(0, 12)}</code></li>`
      );
    })
    .join("");
  return `<details open class="timeline"><summary>history</summary><ul>${rows}</ul></details>`;
}

export function jobPanel(job: JobState | null): string {
  if (!job) {
    return `<section class="job idle"><button class="start-autobound">search lower bound</button></section>`;
  }
  const progress = Object.entries(job.progress)
    .map(([k, v]) => `${escapeHtml(k)}=${escapeHtml(v)}`)
    .join(" ");
  const chain =
    job.status === "done" || job.result
      ? `<pre class="certificate">${escapeHtml(job.result)}</pre>`
      : "";
  const note = job.message ? `<p class="note">${escapeHtml(job.message)}</p>` : "";
  const cancel =
    job.status === "running" ? `<button class="cancel-job">cancel</button>` : "";
  return (
    `<section class="job ${job.status}">` +
    `<span class="status">${job.status}</span> <span class="progress">${progress}</span>` +
    `${cancel}${note}${chain}</section>`
  );
}

export function certificateSteps(certificate: string): string[] {
  const steps: string[] = [];
  let current: string[] | null = null;
  for (const line of certificate.split("\n")) {
    if (line.startsWith("[problem ")) {
      if (current) steps.push(current.join("\n"));
      current = [];
      continue;
    }
    if (line.startsWith("[step ")) {
      if (current) steps.push(current.join("\n"));
      current = null;
      continue;
    }
    current?.push(line);
  }
  if (current) steps.push(current.join("\n"));
  return steps.map((s) => s.trim()).filter(Boolean);
}
